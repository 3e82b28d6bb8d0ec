from __future__ import annotations

from typing import List

import numpy as np

from cotrain.trajectory.types import SUCCESS_LEVELS, CompositionManifest, Dataset, Trajectory


def validate_trajectory(t: Trajectory, manifest: CompositionManifest) -> List[str]:
    """Return the list of violated invariants; an empty list means ok."""
    violations: List[str] = []
    n = len(t)
    if n < 1:
        violations.append("empty trajectory")
    if t.images.ndim != 4 or t.proprio.ndim != 2 or t.actions.ndim != 2:
        violations.append("array rank")
        return violations
    if not (t.images.shape[0] == t.proprio.shape[0] == t.actions.shape[0]):
        violations.append("frame count mismatch between images, proprio and actions")

    rows, cols = manifest.camera.resolution
    if t.images.shape[1:] != (rows, cols, 3):
        violations.append(f"image dims {tuple(t.images.shape[1:])} != {(rows, cols, 3)}")
    if t.images.dtype != np.uint8:
        violations.append(f"image dtype {t.images.dtype} is not uint8")

    if not np.all(np.isfinite(t.proprio)):
        violations.append("non-finite proprio")
    low = np.asarray(manifest.dynamics.action_low, dtype=np.float64)
    high = np.asarray(manifest.dynamics.action_high, dtype=np.float64)
    if t.actions.shape[1] != low.shape[0]:
        violations.append(f"action dim {t.actions.shape[1]} != {low.shape[0]}")
    elif not np.all(np.isfinite(t.actions)):
        violations.append("non-finite action")
    elif np.any(t.actions < low) or np.any(t.actions > high):
        violations.append("action out of bounds")

    if t.success not in SUCCESS_LEVELS:
        violations.append("success not in {0,0.5,1}")
    if t.task_id not in manifest.task_ids:
        violations.append(f"task_id {t.task_id!r} not in manifest")
    missing = t.categories - manifest.object_categories
    if missing:
        violations.append(f"categories {sorted(missing)} not in manifest")
    return violations


def validate_dataset(d: Dataset) -> List[str]:
    """Per-trajectory violations (prefixed by index) plus dataset-level uniformity checks."""
    violations: List[str] = []
    proprio_dims = {t.proprio.shape[-1] for t in d.trajectories if t.proprio.ndim == 2}
    action_dims = {t.actions.shape[-1] for t in d.trajectories if t.actions.ndim == 2}
    if len(proprio_dims) > 1:
        violations.append(f"proprio dims differ across trajectories: {sorted(proprio_dims)}")
    if len(action_dims) > 1:
        violations.append(f"action dims differ across trajectories: {sorted(action_dims)}")
    for i, t in enumerate(d.trajectories):
        violations.extend(f"traj {i}: {v}" for v in validate_trajectory(t, d.manifest))
    return violations
