from cotrain.mimicgen.generate import GenerationReport, execute_plan, generate, plan_actions
from cotrain.mimicgen.segment import BoundaryKind, Segment, SubtaskBoundary, segment_source
from cotrain.mimicgen.transform import connect, segment_actions, transform_segment

__all__ = [
    "BoundaryKind",
    "GenerationReport",
    "Segment",
    "SubtaskBoundary",
    "connect",
    "execute_plan",
    "generate",
    "plan_actions",
    "segment_actions",
    "segment_source",
    "transform_segment",
]
