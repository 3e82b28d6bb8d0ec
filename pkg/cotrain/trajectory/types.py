"""Trajectory/dataset data model.

Frames are held as stacked arrays (images, proprio, actions) rather than
per-frame objects; `Trajectory.frames` yields the (ObservationFrame, Action)
view when one is wanted.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from cotrain.factors import CameraConfig, DynamicsParams
from cotrain.geometry import Rect

SUCCESS_LEVELS: Tuple[float, ...] = (0.0, 0.5, 1.0)


class SourceTag(str, Enum):
    REAL_PROXY = "RealProxy"
    DIGITAL_COUSIN = "DigitalCousin"
    PRIOR = "Prior"

    @property
    def kind(self) -> str:
        return self.value


class GeneratorKind(str, Enum):
    HUMAN_PROXY = "HumanProxy"
    MIMICGEN_LITE = "MimicGenLite"


@dataclass(frozen=True)
class ObjectRecord:
    """Which object instance took part in an episode."""

    instance_id: str
    category: str


@dataclass
class ObservationFrame:
    image: np.ndarray    # (H, W, 3) uint8
    proprio: np.ndarray  # (P,) float64: ee x, y, theta, gripper open fraction


@dataclass
class Action:
    delta: np.ndarray  # (A,) float64: dx, dy, dtheta, gripper command

    @classmethod
    def of(cls, dx: float, dy: float, dtheta: float, gripper: float) -> "Action":
        return cls(np.array([dx, dy, dtheta, gripper], dtype=np.float64))

    def clamped(self, low: Sequence[float], high: Sequence[float]) -> "Action":
        return Action(np.clip(np.asarray(self.delta, dtype=np.float64), low, high))

    @property
    def gripper(self) -> float:
        return float(self.delta[3])


@dataclass(eq=False)
class Trajectory:
    images: np.ndarray
    proprio: np.ndarray
    actions: np.ndarray
    task_id: str
    success: float
    source: SourceTag
    seed: int
    generator: GeneratorKind = GeneratorKind.HUMAN_PROXY
    objects: Tuple[ObjectRecord, ...] = ()
    palette_id: str = "default"

    @classmethod
    def from_frames(cls, frames: Iterable[Tuple[ObservationFrame, Action]], **meta: Any) -> "Trajectory":
        obs_list: List[ObservationFrame] = []
        act_list: List[Action] = []
        for obs, act in frames:
            obs_list.append(obs)
            act_list.append(act)
        if not obs_list:
            raise ValueError("a trajectory needs at least one frame")
        return cls(
            images=np.stack([np.asarray(o.image, dtype=np.uint8) for o in obs_list]),
            proprio=np.stack([np.asarray(o.proprio, dtype=np.float64) for o in obs_list]),
            actions=np.stack([np.asarray(a.delta, dtype=np.float64) for a in act_list]),
            **meta,
        )

    def __len__(self) -> int:
        return int(self.actions.shape[0])

    def frame(self, index: int) -> Tuple[ObservationFrame, Action]:
        return (
            ObservationFrame(image=self.images[index], proprio=self.proprio[index]),
            Action(delta=self.actions[index]),
        )

    @property
    def frames(self) -> Iterator[Tuple[ObservationFrame, Action]]:
        return (self.frame(i) for i in range(len(self)))

    @property
    def image_shape(self) -> Tuple[int, ...]:
        return tuple(self.images.shape[1:])

    @property
    def proprio_dim(self) -> int:
        return int(self.proprio.shape[1])

    @property
    def action_dim(self) -> int:
        return int(self.actions.shape[1])

    @property
    def categories(self) -> FrozenSet[str]:
        return frozenset(o.category for o in self.objects)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Trajectory):
            return NotImplemented
        return (
            self.images.dtype == other.images.dtype
            and self.proprio.dtype == other.proprio.dtype
            and self.actions.dtype == other.actions.dtype
            and np.array_equal(self.images, other.images)
            and np.array_equal(self.proprio, other.proprio)
            and np.array_equal(self.actions, other.actions)
            and self.task_id == other.task_id
            and self.success == other.success
            and self.source == other.source
            and self.seed == other.seed
            and self.generator == other.generator
            and self.objects == other.objects
            and self.palette_id == other.palette_id
        )

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True)
class CompositionManifest:
    """Declared composition factors of a dataset."""

    object_categories: FrozenSet[str]
    instances: Dict[str, Tuple[str, ...]]
    init_region: Rect
    camera: CameraConfig
    texture_ids: FrozenSet[str]
    dynamics: DynamicsParams
    task_ids: FrozenSet[str]

    def __post_init__(self) -> None:
        if self.init_region.area <= 0:
            raise ValueError(f"init_region must have positive area: {self.init_region}")

    @property
    def object_instances(self) -> Dict[str, int]:
        """Instance count per category."""
        return {cat: len(ids) for cat, ids in sorted(self.instances.items())}

    @classmethod
    def from_records(
        cls,
        trajectories: Sequence[Trajectory],
        init_region: Rect,
        camera: CameraConfig,
        dynamics: DynamicsParams,
        task_ids: Iterable[str] = (),
        texture_ids: Iterable[str] = (),
    ) -> "CompositionManifest":
        """Build a manifest from what the trajectories actually contain."""
        instances: Dict[str, set] = {}
        tasks = set(task_ids)
        textures = set(texture_ids)
        for traj in trajectories:
            tasks.add(traj.task_id)
            textures.add(traj.palette_id)
            for rec in traj.objects:
                instances.setdefault(rec.category, set()).add(rec.instance_id)
        return cls(
            object_categories=frozenset(instances),
            instances={cat: tuple(sorted(ids)) for cat, ids in sorted(instances.items())},
            init_region=init_region,
            camera=camera,
            texture_ids=frozenset(textures),
            dynamics=dynamics,
            task_ids=frozenset(tasks),
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "object_categories": sorted(self.object_categories),
            "object_instances": {cat: list(ids) for cat, ids in sorted(self.instances.items())},
            "init_region": self.init_region.to_list(),
            "camera": self.camera.to_dict(),
            "texture_ids": sorted(self.texture_ids),
            "dynamics": self.dynamics.to_dict(),
            "task_ids": sorted(self.task_ids),
        }

    @classmethod
    def from_dict(cls, entry: Dict[str, Any]) -> "CompositionManifest":
        instances = entry.get("object_instances", {}) or {}
        return cls(
            object_categories=frozenset(entry["object_categories"]),
            instances={str(cat): tuple(str(i) for i in ids) for cat, ids in sorted(instances.items())},
            init_region=Rect.from_seq(entry["init_region"]),
            camera=CameraConfig.from_dict(entry["camera"]),
            texture_ids=frozenset(entry.get("texture_ids", [])),
            dynamics=DynamicsParams.from_dict(entry.get("dynamics", {})),
            task_ids=frozenset(entry["task_ids"]),
        )


@dataclass
class Dataset:
    trajectories: List[Trajectory]
    manifest: CompositionManifest
    source: SourceTag
    name: str
    # WorldConfig (as a plain dict) the trajectories were produced in, if known.
    world_spec: Optional[Dict[str, Any]] = None

    def __len__(self) -> int:
        return len(self.trajectories)

    @property
    def frame_count(self) -> int:
        return sum(len(t) for t in self.trajectories)

    @property
    def image_shape(self) -> Optional[Tuple[int, ...]]:
        return self.trajectories[0].image_shape if self.trajectories else None

    @property
    def proprio_dim(self) -> Optional[int]:
        return self.trajectories[0].proprio_dim if self.trajectories else None

    @property
    def action_dim(self) -> Optional[int]:
        return self.trajectories[0].action_dim if self.trajectories else None

    def head(self, count: int, name: Optional[str] = None) -> "Dataset":
        """First `count` trajectories, manifest recounted over them."""
        kept = self.trajectories[:count]
        manifest = CompositionManifest.from_records(
            kept,
            init_region=self.manifest.init_region,
            camera=self.manifest.camera,
            dynamics=self.manifest.dynamics,
        ) if kept else self.manifest
        return Dataset(
            trajectories=list(kept),
            manifest=manifest,
            source=self.source,
            name=name or f"{self.name}[:{count}]",
            world_spec=self.world_spec,
        )
