"""Object-centric segmentation of source demonstrations."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence, Tuple

from cotrain.errors import UnsegmentableDemo
from cotrain.geometry import Pose2
from cotrain.trajectory.types import Trajectory
from cotrain.world.spec import TaskKind, TaskSpec
from cotrain.world.state import DOOR_ID, State

logger = logging.getLogger(__name__)

TARGET_REGION_ID = "target_region"


class BoundaryKind(str, Enum):
    GRASP = "GraspEvent"
    RELEASE = "ReleaseEvent"
    DOOR_CONTACT_END = "DoorContactEnd"


@dataclass(frozen=True)
class SubtaskBoundary:
    kind: BoundaryKind
    frame_index: int
    object_id: Optional[str] = None


@dataclass(frozen=True)
class Segment:
    """Frames [start, end) of a source trajectory and the object governing them.

    ee_path holds the ee pose before each frame's action plus the pose after
    the last one (len(self) + 1 poses); gripper holds the frame commands.
    """

    start: int
    end: int
    reference_object: str
    reference_pose: Pose2
    ee_path: Tuple[Pose2, ...]
    gripper: Tuple[float, ...]
    boundary: SubtaskBoundary

    def __post_init__(self) -> None:
        if self.end <= self.start:
            raise ValueError(f"empty segment [{self.start}, {self.end})")
        if len(self.ee_path) != len(self) + 1 or len(self.gripper) != len(self):
            raise ValueError("segment path/gripper lengths do not match its frame range")

    def __len__(self) -> int:
        return self.end - self.start


def _events(states: Sequence[State]) -> List[SubtaskBoundary]:
    events: List[SubtaskBoundary] = []
    for k in range(1, len(states)):
        before, after = states[k - 1].held_object, states[k].held_object
        if before is None and after is not None:
            events.append(SubtaskBoundary(BoundaryKind.GRASP, k - 1, after))
        elif before is not None and after is None:
            events.append(SubtaskBoundary(BoundaryKind.RELEASE, k - 1, before))
    return events


def _door_moved(states: Sequence[State]) -> bool:
    first = states[0].door_angle
    return any(s.door_angle != first for s in states[1:])


def _reference(boundary: SubtaskBoundary, start_state: State, task: Optional[TaskSpec]) -> Tuple[str, Pose2]:
    if boundary.kind == BoundaryKind.DOOR_CONTACT_END:
        return DOOR_ID, start_state.door.pose  # type: ignore[union-attr]
    if boundary.kind == BoundaryKind.RELEASE:
        if task is None or task.target_region is None:
            raise UnsegmentableDemo("unsegmentable demo: release segment needs the task's target region")
        return TARGET_REGION_ID, Pose2(*task.target_region.center)
    return boundary.object_id, start_state.object(boundary.object_id).pose  # type: ignore[arg-type]


def segment_source(t: Trajectory, episode_replay: Sequence[State], task: Optional[TaskSpec] = None) -> List[Segment]:
    """Split `t` at grasp/release (or door) events; every frame lands in exactly one segment."""
    frames = len(t)
    if len(episode_replay) != frames + 1:
        raise ValueError(f"replay has {len(episode_replay)} states, expected {frames + 1}")

    is_door = episode_replay[0].door is not None or (task is not None and task.kind == TaskKind.CLOSE_DOOR)
    if is_door:
        if not _door_moved(episode_replay):
            raise UnsegmentableDemo(f"unsegmentable demo: door never moved (seed {t.seed})")
        boundaries = [SubtaskBoundary(BoundaryKind.DOOR_CONTACT_END, frames - 1, DOOR_ID)]
    else:
        boundaries = _events(episode_replay)
        if not boundaries:
            raise UnsegmentableDemo(f"unsegmentable demo: no grasp or release events (seed {t.seed})")
        last = boundaries[-1]
        boundaries[-1] = SubtaskBoundary(last.kind, frames - 1, last.object_id)

    segments: List[Segment] = []
    start = 0
    for boundary in boundaries:
        end = boundary.frame_index + 1
        if end <= start:
            continue
        ref_id, ref_pose = _reference(boundary, episode_replay[start], task)
        segments.append(
            Segment(
                start=start,
                end=end,
                reference_object=ref_id,
                reference_pose=ref_pose,
                ee_path=tuple(s.ee_pose for s in episode_replay[start : end + 1]),
                gripper=tuple(float(g) for g in t.actions[start:end, 3]),
                boundary=boundary,
            )
        )
        start = end
    logger.debug("seed %d: %d segments", t.seed, len(segments))
    return segments
