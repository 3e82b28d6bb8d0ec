"""Synthetic datasets that skip rendering, for sampler/policy/storage tests."""
from __future__ import annotations

from typing import Sequence

import numpy as np

from cotrain.factors import CameraConfig, DynamicsParams
from cotrain.geometry import Rect
from cotrain.trajectory.types import CompositionManifest, Dataset, ObjectRecord, SourceTag, Trajectory


def make_trajectory(
    frames: int,
    source: SourceTag = SourceTag.REAL_PROXY,
    seed: int = 0,
    image_value: int = 0,
    action: Sequence[float] = (0.0, 0.0, 0.0, 1.0),
    size: int = 32,
    category: str = "cup",
) -> Trajectory:
    return Trajectory(
        images=np.full((frames, size, size, 3), image_value, dtype=np.uint8),
        proprio=np.tile(np.array([0.4, 0.4, 0.0, 1.0]), (frames, 1)),
        actions=np.tile(np.asarray(action, dtype=np.float64), (frames, 1)),
        task_id="cup_to_plate",
        success=1.0,
        source=source,
        seed=seed,
        objects=(ObjectRecord(f"{category}_a", category),),
    )


def make_dataset(
    lengths: Sequence[int],
    source: SourceTag = SourceTag.REAL_PROXY,
    name: str = "synthetic",
    size: int = 32,
    **traj_kwargs,
) -> Dataset:
    trajs = [make_trajectory(n, source=source, seed=i, size=size, **traj_kwargs) for i, n in enumerate(lengths)]
    manifest = CompositionManifest.from_records(
        trajs,
        init_region=Rect(0.1, 0.1, 0.3, 0.3),
        camera=CameraConfig(resolution=(size, size)),
        dynamics=DynamicsParams(),
    )
    return Dataset(trajectories=trajs, manifest=manifest, source=source, name=name)
