"""Data-composition analysis: recount manifests, diff factor sets, aggregate statistics."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from cotrain.geometry import wrap_angle
from cotrain.trajectory.types import CompositionManifest, Dataset
from cotrain.world.collect import replay_episode
from cotrain.world.sim import check_success
from cotrain.world.spec import WorldConfig

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CompositionDelta:
    category_overlap: Tuple[int, int, int]  # shared, a-only, b-only
    camera_translation_delta: float  # meters
    camera_rotation_delta: float  # degrees
    init_region_iou: float
    dynamics_delta: Dict[str, float]
    task_overlap: Tuple[int, int, int]
    texture_overlap: Tuple[int, int, int]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "category_overlap": {"shared": self.category_overlap[0], "a_only": self.category_overlap[1], "b_only": self.category_overlap[2]},
            "camera_translation_delta_m": self.camera_translation_delta,
            "camera_rotation_delta_deg": self.camera_rotation_delta,
            "init_region_iou": self.init_region_iou,
            "dynamics_delta": dict(self.dynamics_delta),
            "task_overlap": {"shared": self.task_overlap[0], "a_only": self.task_overlap[1], "b_only": self.task_overlap[2]},
            "texture_overlap": {"shared": self.texture_overlap[0], "a_only": self.texture_overlap[1], "b_only": self.texture_overlap[2]},
        }

    def table(self) -> str:
        rows = [
            ("categories shared/a-only/b-only", "%d / %d / %d" % self.category_overlap),
            ("tasks shared/a-only/b-only", "%d / %d / %d" % self.task_overlap),
            ("textures shared/a-only/b-only", "%d / %d / %d" % self.texture_overlap),
            ("camera translation (m)", f"{self.camera_translation_delta:.4f}"),
            ("camera rotation (deg)", f"{self.camera_rotation_delta:.2f}"),
            ("init region IoU", f"{self.init_region_iou:.4f}"),
        ]
        rows += [(f"dynamics |d {k}|", f"{v:.6g}") for k, v in sorted(self.dynamics_delta.items())]
        width = max(len(k) for k, _ in rows)
        return "\n".join(f"{k.ljust(width)}  {v}" for k, v in rows)


def _overlap(a: frozenset, b: frozenset) -> Tuple[int, int, int]:
    return len(a & b), len(a - b), len(b - a)


def summarize(d: Dataset) -> CompositionManifest:
    """Manifest recomputed from trajectory contents plus the stored camera/dynamics/region."""
    stored = d.manifest
    init_region = stored.init_region
    if d.world_spec:
        init_region = WorldConfig.from_dict(d.world_spec).effective_init_region()
    return CompositionManifest.from_records(
        d.trajectories,
        init_region=init_region,
        camera=stored.camera,
        dynamics=stored.dynamics,
    )


def diff(a: CompositionManifest, b: CompositionManifest) -> CompositionDelta:
    ca, cb = a.camera.center, b.camera.center
    da, db = a.dynamics.numeric_fields(), b.dynamics.numeric_fields()
    return CompositionDelta(
        category_overlap=_overlap(a.object_categories, b.object_categories),
        camera_translation_delta=math.hypot(ca.x - cb.x, ca.y - cb.y),
        camera_rotation_delta=abs(math.degrees(wrap_angle(ca.theta - cb.theta))),
        init_region_iou=a.init_region.iou(b.init_region),
        dynamics_delta={k: abs(da[k] - db[k]) for k in sorted(da)},
        task_overlap=_overlap(a.task_ids, b.task_ids),
        texture_overlap=_overlap(a.texture_ids, b.texture_ids),
    )


def dataset_stats(d: Dataset) -> Dict[str, Any]:
    """Aggregate statistics in the shape of a dataset-statistics table."""
    lengths = [len(t) for t in d.trajectories]
    m = summarize(d) if d.trajectories else d.manifest
    successes = [t.success for t in d.trajectories]
    return {
        "name": d.name,
        "source": d.source.value,
        "trajectories": len(d.trajectories),
        "frames": int(sum(lengths)),
        "mean_length": float(np.mean(lengths)) if lengths else 0.0,
        "min_length": int(min(lengths)) if lengths else 0,
        "max_length": int(max(lengths)) if lengths else 0,
        "mean_success": float(np.mean(successes)) if successes else 0.0,
        "object_categories": sorted(m.object_categories),
        "object_instances": m.object_instances,
        "textures": sorted(m.texture_ids),
        "tasks": sorted(m.task_ids),
        "init_region_area_m2": m.init_region.area,
    }


@dataclass(frozen=True)
class OpenLoopGap:
    episodes: int
    mean_final_ee_error: float  # meters
    max_final_ee_error: float
    replay_success_rate: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "episodes": self.episodes,
            "mean_final_ee_error_m": self.mean_final_ee_error,
            "max_final_ee_error_m": self.max_final_ee_error,
            "replay_success_rate": self.replay_success_rate,
        }


def open_loop_gap(d: Dataset, world: WorldConfig, limit: Optional[int] = None) -> OpenLoopGap:
    """Replay recorded actions open-loop in `world` and measure how far the ee ends up from the recording."""
    trajs = d.trajectories[:limit] if limit else d.trajectories
    if not trajs:
        return OpenLoopGap(0, 0.0, 0.0, 0.0)
    errors: List[float] = []
    wins = 0
    for traj in trajs:
        states = replay_episode(world, traj)
        recorded_last = traj.proprio[-1]
        # proprio holds the pre-action pose; the replayed pose before the last action is states[-2]
        replayed = states[-2].ee_pose
        errors.append(math.hypot(replayed.x - recorded_last[0], replayed.y - recorded_last[1]))
        wins += int(check_success(states[-1], world.task) == 1.0)
    return OpenLoopGap(
        episodes=len(trajs),
        mean_final_ee_error=float(np.mean(errors)),
        max_final_ee_error=float(np.max(errors)),
        replay_success_rate=wins / len(trajs),
    )
