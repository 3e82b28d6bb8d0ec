from cotrain.trajectory.types import (
    SUCCESS_LEVELS,
    Action,
    CompositionManifest,
    Dataset,
    GeneratorKind,
    ObjectRecord,
    ObservationFrame,
    SourceTag,
    Trajectory,
)
from cotrain.trajectory.storage import concat_datasets, load_dataset, save_dataset
from cotrain.trajectory.validate import validate_dataset, validate_trajectory

__all__ = [
    "SUCCESS_LEVELS",
    "Action",
    "CompositionManifest",
    "Dataset",
    "GeneratorKind",
    "ObjectRecord",
    "ObservationFrame",
    "SourceTag",
    "Trajectory",
    "concat_datasets",
    "load_dataset",
    "save_dataset",
    "validate_dataset",
    "validate_trajectory",
]
