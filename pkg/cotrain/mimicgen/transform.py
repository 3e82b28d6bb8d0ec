from __future__ import annotations

import math
from dataclasses import replace
from typing import List, Optional

import numpy as np

from cotrain.config import DEFAULTS
from cotrain.errors import OutOfWorkspace
from cotrain.geometry import Pose2, Rect, wrap_angle
from cotrain.mimicgen.segment import BoundaryKind, Segment
from cotrain.trajectory.types import Action

COINCIDENT = 1e-12


def transform_segment(seg: Segment, new_reference_pose: Pose2, workspace: Optional[Rect] = None) -> Segment:
    """Rigidly move the segment's ee path so it keeps its pose relative to the reference object."""
    T = new_reference_pose.compose(seg.reference_pose.inverse())
    path = tuple(T.compose(p) for p in seg.ee_path)
    if workspace is not None:
        for k, p in enumerate(path):
            if not workspace.contains(p.x, p.y, tol=1e-12):
                raise OutOfWorkspace(
                    f"out of workspace: frame {seg.start + k} maps to ({p.x:.4f}, {p.y:.4f})"
                )
    return replace(seg, reference_pose=new_reference_pose, ee_path=path)


def trim_approach(seg: Segment, radius: float) -> Segment:
    """Drop the free-space lead-in of a grasp or release segment.

    Keeps the suffix whose poses all lie within `radius` of the segment's last
    pose (at least one frame). Door segments are returned unchanged.
    """
    if seg.boundary.kind not in (BoundaryKind.GRASP, BoundaryKind.RELEASE):
        return seg
    end = seg.ee_path[-1]
    first = 0
    for k, p in enumerate(seg.ee_path[:-1]):
        if p.distance_to(end) > radius:
            first = k + 1
    first = min(first, len(seg) - 1)
    if first == 0:
        return seg
    return replace(
        seg,
        start=seg.start + first,
        ee_path=seg.ee_path[first:],
        gripper=seg.gripper[first:],
    )


def segment_actions(seg: Segment) -> np.ndarray:
    """Finite differences of the ee path, with the segment's gripper commands."""
    out = np.empty((len(seg), 4), dtype=np.float64)
    for k in range(len(seg)):
        a, b = seg.ee_path[k], seg.ee_path[k + 1]
        out[k] = (b.x - a.x, b.y - a.y, wrap_angle(b.theta - a.theta), seg.gripper[k])
    return out


def connect(
    prev_end: Pose2,
    next_start: Pose2,
    max_step: float = DEFAULTS.connect_max_step,
    gripper: float = 1.0,
    max_turn: float = DEFAULTS.action_high[2],
) -> List[Action]:
    """Linear interpolation in (x, y, theta) with at most max_step meters per action."""
    if max_step <= 0:
        raise ValueError(f"max_step must be > 0, got {max_step}")
    dx = next_start.x - prev_end.x
    dy = next_start.y - prev_end.y
    dtheta = wrap_angle(next_start.theta - prev_end.theta)
    dist = math.hypot(dx, dy)
    if dist <= COINCIDENT and abs(dtheta) <= COINCIDENT:
        return []
    n = max(1, math.ceil(dist / max_step - 1e-9), math.ceil(abs(dtheta) / max_turn - 1e-9))
    actions: List[Action] = []
    px, py, pt = prev_end.x, prev_end.y, 0.0
    for k in range(1, n + 1):
        if k == n:
            wx, wy, wt = next_start.x, next_start.y, dtheta
        else:
            f = k / n
            wx, wy, wt = prev_end.x + f * dx, prev_end.y + f * dy, f * dtheta
        actions.append(Action.of(wx - px, wy - py, wt - pt, gripper))
        px, py, pt = wx, wy, wt
    return actions
