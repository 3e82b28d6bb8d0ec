"""TwinWorld kinematics: reset, step and success checks."""
from __future__ import annotations

import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np

from cotrain.errors import PlacementFailure, TaskStateMismatch
from cotrain.geometry import Pose2, Vec2
from cotrain.rng import derive_seed, new_rng
from cotrain.trajectory.types import Action
from cotrain.world.spec import TaskKind, TaskSpec, WorldConfig
from cotrain.world.state import DOOR_ID, ObjectState, State

logger = logging.getLogger(__name__)

PLACEMENT_TRIES = 200
SEPARATION_MARGIN = 0.01
# door contact band, as fractions of the door length
DOOR_CONTACT_MIN = 0.1


def wrap_degrees(angle: float) -> float:
    return (angle + 180.0) % 360.0 - 180.0


def polar_about(hinge: Pose2, point: Vec2) -> Tuple[float, float]:
    """(radius, angle in degrees) of `point` in the hinge frame."""
    lx, ly = hinge.inverse().transform_point(*point)
    return math.hypot(lx, ly), math.degrees(math.atan2(ly, lx))


def door_tip(hinge: Pose2, angle_deg: float, length: float) -> Vec2:
    rad = math.radians(angle_deg)
    return hinge.transform_point(length * math.cos(rad), length * math.sin(rad))


def reset(config: WorldConfig, episode_seed: int) -> State:
    rng = new_rng(derive_seed(episode_seed, "reset"))
    region = config.placement_region()
    core = config.border_core() if config.init_mode == "border" else None
    scale = config.gap.geometry_scale

    placed: List[ObjectState] = []
    for k in range(config.objects_per_episode):
        spec = config.object_set[int(rng.integers(len(config.object_set)))]
        radius = spec.radius * scale
        for _ in range(PLACEMENT_TRIES):
            x = float(rng.uniform(region.x0, region.x1))
            y = float(rng.uniform(region.y0, region.y1))
            if core is not None and core.contains(x, y):
                continue
            if any(math.hypot(x - o.pose.x, y - o.pose.y) < radius + o.radius + SEPARATION_MARGIN for o in placed):
                continue
            break
        else:
            raise PlacementFailure(
                f"placement failure: could not place object {k} ({spec.id}) in "
                f"{region.to_list()} after {PLACEMENT_TRIES} tries"
            )
        yaw = float(rng.uniform(-config.object_yaw_range, config.object_yaw_range)) if config.object_yaw_range > 0 else 0.0
        placed.append(
            ObjectState(
                id=DOOR_ID if spec.is_door else f"obj{k}",
                pose=Pose2(x, y, yaw),
                radius=radius,
                category=spec.category,
                instance_id=spec.id,
                color=spec.color,
            )
        )

    door_angle = config.task.initial_angle_deg if config.task.kind == TaskKind.CLOSE_DOOR else None
    return State(
        ee_pose=config.home,
        gripper=1.0,
        objects=tuple(placed),
        episode_seed=int(episode_seed),
        door_angle=door_angle,
    )


def _nearest_graspable(objects: Sequence[ObjectState], ee: Pose2, grasp_radius: float) -> Optional[ObjectState]:
    best: Optional[ObjectState] = None
    best_d = grasp_radius
    for obj in objects:
        if obj.is_door:
            continue
        d = ee.distance_to(obj.pose)
        if d <= best_d:
            best, best_d = obj, d
    return best


def push_door(hinge: Pose2, angle: float, prev_ee: Pose2, new_ee: Pose2, length: float) -> float:
    """Door angle after the ee moves from prev_ee to new_ee.

    The door only closes: it follows the ee when the ee sweeps across it
    from the open side while inside the contact band.
    """
    r_new, psi_new = polar_about(hinge, new_ee.xy)
    if not (DOOR_CONTACT_MIN * length <= r_new <= length):
        return angle
    _, psi_prev = polar_about(hinge, prev_ee.xy)
    psi_path = psi_prev + wrap_degrees(psi_new - psi_prev)
    if psi_prev >= angle - 1e-9 and psi_path < angle:
        return max(0.0, psi_path)
    return angle


def step(s: State, a: Action, config: WorldConfig) -> State:
    dyn = config.dynamics()
    delta = np.clip(np.asarray(a.delta, dtype=np.float64), dyn.action_low, dyn.action_high)
    dx, dy, dtheta, command = (float(v) for v in delta)

    std = config.gap.action_noise_std
    if std > 0:
        noise = new_rng(derive_seed(s.episode_seed, "noise", s.step_count)).normal(0.0, std, size=2)
        dx += float(noise[0])
        dy += float(noise[1])
    x, y = config.table.clamp(s.ee_pose.x + dx, s.ee_pose.y + dy)
    ee = Pose2(x, y, s.ee_pose.theta + dtheta)

    held = s.held_object
    offset = s.grasp_offset
    objects = list(s.objects)
    if held is not None and offset is not None:
        objects = [o.moved(ee.compose(offset)) if o.id == held else o for o in objects]

    # the gripper only stays shut around an object: closing on nothing is a no-op
    if command < 0.5:
        if held is None:
            target = _nearest_graspable(objects, ee, config.grasp_radius)
            if target is not None:
                held = target.id
                offset = target.pose.relative_to(ee)
        gripper = 0.0 if held is not None else 1.0
    else:
        held = None
        offset = None
        gripper = 1.0

    door_angle = s.door_angle
    door = s.door
    if door is not None and door_angle is not None:
        door_angle = push_door(door.pose, door_angle, s.ee_pose, ee, config.task.door_length)

    return State(
        ee_pose=ee,
        gripper=gripper,
        objects=tuple(objects),
        episode_seed=s.episode_seed,
        held_object=held,
        grasp_offset=offset,
        door_angle=door_angle,
        step_count=s.step_count + 1,
    )


def check_success(s: State, task: TaskSpec) -> float:
    if task.kind == TaskKind.CLOSE_DOOR:
        if s.door_angle is None or s.door is None:
            raise TaskStateMismatch("task/state mismatch: CloseDoor task on a state without a door")
        return 1.0 if s.door_angle < task.threshold_deg else 0.0

    movable = s.movable
    if s.door_angle is not None or not movable:
        raise TaskStateMismatch("task/state mismatch: PickPlace task on a state without a movable object")
    target = movable[0]
    if s.held_object == target.id:
        return 0.5
    if task.target_region.contains(*target.pose.xy):  # type: ignore[union-attr]
        return 1.0
    return 0.0
