"""Scripted proportional-control expert standing in for a human teleoperator."""
from __future__ import annotations

import math
from typing import Optional, Tuple

import numpy as np

from cotrain.config import DEFAULTS
from cotrain.geometry import Pose2, Vec2, wrap_angle
from cotrain.rng import derive_seed, new_rng
from cotrain.trajectory.types import Action, ObservationFrame
from cotrain.world.sim import polar_about
from cotrain.world.spec import TaskKind, TaskSpec
from cotrain.world.state import State

GRASP_TOLERANCE = 0.012
RELEASE_TOLERANCE = 0.015
# door pushing
CONTACT_RADIUS_FRACTION = 0.7
PRE_CONTACT_LEAD_DEG = 15.0
SWEEP_STEP_DEG = 8.0
SWEEP_FLOOR_DEG = -8.0
CONTACT_BAND = 0.02

OPEN = 1.0
CLOSED = 0.0


def _toward(ee: Pose2, goal: Vec2, max_speed: float) -> Tuple[float, float]:
    dx = goal[0] - ee.x
    dy = goal[1] - ee.y
    dist = math.hypot(dx, dy)
    if dist > max_speed:
        dx *= max_speed / dist
        dy *= max_speed / dist
    return dx, dy


def _turn(ee: Pose2, goal_theta: float) -> float:
    return float(np.clip(wrap_angle(goal_theta - ee.theta), DEFAULTS.action_low[2], DEFAULTS.action_high[2]))


def _pick_place(s: State, task: TaskSpec, jitter: np.ndarray, max_speed: float) -> Action:
    target = s.movable[0]
    ee = s.ee_pose
    if s.held_object == target.id:
        center = task.target_region.center  # type: ignore[union-attr]
        if ee.distance_to(Pose2(*center)) <= RELEASE_TOLERANCE:
            dx, dy = _toward(ee, center, max_speed)
            return Action.of(dx, dy, 0.0, OPEN)
        goal = (center[0] + jitter[0], center[1] + jitter[1])
        dx, dy = _toward(ee, goal, max_speed)
        return Action.of(dx, dy, 0.0, CLOSED)

    if s.held_object is not None:
        # holding the wrong thing: let go
        return Action.of(0.0, 0.0, 0.0, OPEN)
    if task.target_region.contains(*target.pose.xy):  # type: ignore[union-attr]
        return Action.of(0.0, 0.0, 0.0, OPEN)

    dtheta = _turn(ee, target.pose.theta)
    if ee.distance_to(target.pose) <= GRASP_TOLERANCE and s.gripper_open:
        dx, dy = _toward(ee, target.pose.xy, max_speed)
        return Action.of(dx, dy, dtheta, CLOSED)
    goal = (target.pose.x + jitter[0], target.pose.y + jitter[1])
    dx, dy = _toward(ee, goal, max_speed)
    return Action.of(dx, dy, dtheta, OPEN)


def _close_door(s: State, task: TaskSpec, jitter: np.ndarray, max_speed: float) -> Action:
    hinge = s.door.pose  # type: ignore[union-attr]
    angle = float(s.door_angle)  # type: ignore[arg-type]
    ee = s.ee_pose
    r_contact = CONTACT_RADIUS_FRACTION * task.door_length
    r, psi = polar_about(hinge, ee.xy)

    if abs(r - r_contact) < CONTACT_BAND and angle - 1.0 <= psi <= angle + 25.0:
        psi_goal = max(psi - SWEEP_STEP_DEG, SWEEP_FLOOR_DEG)
        goal = hinge.transform_point(r_contact * math.cos(math.radians(psi_goal)), r_contact * math.sin(math.radians(psi_goal)))
        dx, dy = _toward(ee, goal, max_speed)
        return Action.of(dx, dy, 0.0, OPEN)

    lead = math.radians(angle + PRE_CONTACT_LEAD_DEG)
    px, py = hinge.transform_point(r_contact * math.cos(lead), r_contact * math.sin(lead))
    dx, dy = _toward(ee, (px + jitter[0], py + jitter[1]), max_speed)
    return Action.of(dx, dy, 0.0, OPEN)


def scripted_expert(
    s: State,
    task: TaskSpec,
    rng: np.random.Generator,
    max_speed: float = DEFAULTS.expert_max_speed,
    jitter_std: float = DEFAULTS.expert_jitter_std,
) -> Action:
    """One expert action: approach, grasp, carry, release; or reach and sweep the door shut."""
    # drawn every call so the stream position depends only on the step index
    jitter = rng.normal(0.0, jitter_std, size=2) if jitter_std > 0 else np.zeros(2)
    if task.kind == TaskKind.CLOSE_DOOR:
        return _close_door(s, task, jitter, max_speed)
    return _pick_place(s, task, jitter, max_speed)


class ExpertController:
    """The scripted expert behind the controller protocol used by rollouts."""

    name = "expert"

    def __init__(self, task: TaskSpec, jitter_std: float = DEFAULTS.expert_jitter_std) -> None:
        self.task = task
        self.jitter_std = jitter_std
        self._rng: Optional[np.random.Generator] = None

    def begin(self, episode_seed: int) -> None:
        self._rng = new_rng(derive_seed(episode_seed, "expert"))

    def act(self, state: State, obs: ObservationFrame) -> Action:
        if self._rng is None:
            raise RuntimeError("ExpertController.begin() must be called before act()")
        return scripted_expert(state, self.task, self._rng, jitter_std=self.jitter_std)

    def spawn(self) -> "ExpertController":
        return ExpertController(self.task, self.jitter_std)
