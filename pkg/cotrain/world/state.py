from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np

from cotrain.geometry import Pose2
from cotrain.world.objects import DOOR_CATEGORY

DOOR_ID = "door"


@dataclass(frozen=True)
class ObjectState:
    id: str
    pose: Pose2
    radius: float
    category: str
    instance_id: str
    color: Tuple[int, int, int]

    @property
    def is_door(self) -> bool:
        return self.category == DOOR_CATEGORY

    def moved(self, pose: Pose2) -> "ObjectState":
        return replace(self, pose=pose)


@dataclass(frozen=True)
class State:
    ee_pose: Pose2
    gripper: float  # open fraction, 1.0 open, 0.0 closed
    objects: Tuple[ObjectState, ...]
    episode_seed: int
    held_object: Optional[str] = None
    # held object's pose in the ee frame, fixed at grasp time
    grasp_offset: Optional[Pose2] = None
    door_angle: Optional[float] = None  # degrees
    step_count: int = 0

    def object(self, object_id: str) -> ObjectState:
        for obj in self.objects:
            if obj.id == object_id:
                return obj
        raise KeyError(object_id)

    @property
    def door(self) -> Optional[ObjectState]:
        for obj in self.objects:
            if obj.is_door:
                return obj
        return None

    @property
    def movable(self) -> Tuple[ObjectState, ...]:
        return tuple(o for o in self.objects if not o.is_door)

    @property
    def gripper_open(self) -> bool:
        return self.gripper >= 0.5

    def proprio(self) -> np.ndarray:
        return np.array([self.ee_pose.x, self.ee_pose.y, self.ee_pose.theta, self.gripper], dtype=np.float64)
