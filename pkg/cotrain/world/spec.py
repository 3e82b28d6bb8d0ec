"""World parameterization: task, domain gap and everything reset/step need."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Dict, Optional, Tuple

from cotrain.config import DEFAULTS
from cotrain.errors import ConfigError
from cotrain.factors import CameraConfig, DynamicsParams
from cotrain.geometry import Pose2, Rect
from cotrain.trajectory.types import SourceTag
from cotrain.world.objects import ObjectSpec, resolve_object
from cotrain.world.palettes import get_palette

TABLE = Rect(*DEFAULTS.table)
DEFAULT_HOME = Pose2(0.45, 0.22, 0.0)

SEED_POLICIES = ("derived", "sequential")
INIT_MODES = ("uniform", "border", "center")


class TaskKind(str, Enum):
    PICK_PLACE = "PickPlace"
    CLOSE_DOOR = "CloseDoor"


@dataclass(frozen=True)
class TaskSpec:
    kind: TaskKind
    language_tag: str
    source_region: Optional[Rect] = None
    target_region: Optional[Rect] = None
    threshold_deg: float = 5.0
    # door geometry
    initial_angle_deg: float = 115.0
    door_length: float = 0.25

    def __post_init__(self) -> None:
        if self.kind == TaskKind.PICK_PLACE:
            if self.source_region is None or self.target_region is None:
                raise ConfigError(f"PickPlace task {self.language_tag!r} needs source_region and target_region")
            if not self.source_region.disjoint(self.target_region):
                raise ConfigError(f"PickPlace task {self.language_tag!r}: source and target regions overlap")
            if self.target_region.area <= 0:
                raise ConfigError(f"PickPlace task {self.language_tag!r}: target region has no area")
        else:
            if not (0.0 < self.threshold_deg < 90.0):
                raise ConfigError(f"CloseDoor threshold must be in (0, 90) degrees, got {self.threshold_deg}")
            if not (self.threshold_deg <= self.initial_angle_deg < 180.0):
                raise ConfigError(f"CloseDoor initial angle out of range: {self.initial_angle_deg}")
            if self.door_length <= 0:
                raise ConfigError(f"door length must be positive, got {self.door_length}")

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {"kind": self.kind.value, "language_tag": self.language_tag}
        if self.kind == TaskKind.PICK_PLACE:
            out["source_region"] = self.source_region.to_list()  # type: ignore[union-attr]
            out["target_region"] = self.target_region.to_list()  # type: ignore[union-attr]
        else:
            out["threshold_deg"] = float(self.threshold_deg)
            out["initial_angle_deg"] = float(self.initial_angle_deg)
            out["door_length"] = float(self.door_length)
        return out

    @classmethod
    def from_dict(cls, entry: Dict[str, Any]) -> "TaskSpec":
        try:
            kind = TaskKind(entry.get("kind", TaskKind.PICK_PLACE.value))
        except ValueError as exc:
            raise ConfigError(f"unknown task kind {entry.get('kind')!r}") from exc
        source = entry.get("source_region")
        target = entry.get("target_region")
        return cls(
            kind=kind,
            language_tag=str(entry.get("language_tag", kind.value)),
            source_region=Rect.from_seq(source) if source is not None else None,
            target_region=Rect.from_seq(target) if target is not None else None,
            threshold_deg=float(entry.get("threshold_deg", 5.0)),
            initial_angle_deg=float(entry.get("initial_angle_deg", 115.0)),
            door_length=float(entry.get("door_length", 0.25)),
        )


@dataclass(frozen=True)
class GapConfig:
    """Knobs that make a world a cousin rather than a twin of another."""

    camera_offset: Pose2 = field(default_factory=Pose2.identity)
    palette_id: str = "default"
    geometry_scale: float = 1.0
    action_noise_std: float = 0.0
    init_region_override: Optional[Rect] = None

    def __post_init__(self) -> None:
        if not (self.geometry_scale > 0):
            raise ConfigError(f"geometry_scale must be > 0, got {self.geometry_scale}")
        if not (self.action_noise_std >= 0):
            raise ConfigError(f"action_noise_std must be >= 0, got {self.action_noise_std}")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "camera_offset": self.camera_offset.to_list(),
            "palette_id": self.palette_id,
            "geometry_scale": float(self.geometry_scale),
            "action_noise_std": float(self.action_noise_std),
            "init_region_override": (
                self.init_region_override.to_list() if self.init_region_override is not None else None
            ),
        }

    @classmethod
    def from_dict(cls, entry: Dict[str, Any]) -> "GapConfig":
        offset = entry.get("camera_offset")
        override = entry.get("init_region_override")
        return cls(
            camera_offset=Pose2.from_seq(offset) if offset is not None else Pose2.identity(),
            palette_id=str(entry.get("palette_id", "default")),
            geometry_scale=float(entry.get("geometry_scale", 1.0)),
            action_noise_std=float(entry.get("action_noise_std", 0.0)),
            init_region_override=Rect.from_seq(override) if override is not None else None,
        )


@dataclass(frozen=True)
class WorldConfig:
    task: TaskSpec
    init_region: Rect
    object_set: Tuple[ObjectSpec, ...]
    name: str = "world"
    gap: GapConfig = field(default_factory=GapConfig)
    camera: CameraConfig = field(default_factory=CameraConfig)
    episode_horizon: int = DEFAULTS.episode_horizon
    # "derived": episode i gets derive_seed(seed, "episode", i); "sequential": seed + i
    seed_policy: str = "derived"
    objects_per_episode: int = 1
    # object yaw drawn uniformly from [-range, range] radians
    object_yaw_range: float = 0.0
    init_mode: str = "uniform"
    border_band: float = 0.2
    center_fraction: float = 0.2
    home: Pose2 = DEFAULT_HOME
    source_tag: SourceTag = SourceTag.REAL_PROXY
    table: Rect = TABLE
    grasp_radius: float = DEFAULTS.grasp_radius

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        if self.episode_horizon < 1:
            raise ConfigError(f"{self.name}: episode_horizon must be >= 1, got {self.episode_horizon}")
        if self.init_region.area <= 0:
            raise ConfigError(f"{self.name}: init_region must have positive area")
        if not self.table.contains_rect(self.init_region):
            raise ConfigError(f"{self.name}: init_region {self.init_region.to_list()} lies outside the table")
        region = self.effective_init_region()
        if region.area <= 0 or not self.table.contains_rect(region):
            raise ConfigError(f"{self.name}: init_region_override {region.to_list()} is invalid")
        if not self.table.contains(*self.home.xy):
            raise ConfigError(f"{self.name}: home pose is off the table")
        if not self.object_set:
            raise ConfigError(f"{self.name}: object_set is empty")
        if self.objects_per_episode < 1:
            raise ConfigError(f"{self.name}: objects_per_episode must be >= 1")
        if self.seed_policy not in SEED_POLICIES:
            raise ConfigError(f"{self.name}: seed_policy must be one of {SEED_POLICIES}")
        if self.init_mode not in INIT_MODES:
            raise ConfigError(f"{self.name}: init_mode must be one of {INIT_MODES}")
        if not (0.0 < self.border_band < 0.5):
            raise ConfigError(f"{self.name}: border_band must be in (0, 0.5)")
        if not (0.0 < self.center_fraction <= 1.0):
            raise ConfigError(f"{self.name}: center_fraction must be in (0, 1]")
        if self.object_yaw_range < 0 or not math.isfinite(self.object_yaw_range):
            raise ConfigError(f"{self.name}: object_yaw_range must be a finite nonnegative angle")
        doors = [o for o in self.object_set if o.is_door]
        if self.task.kind == TaskKind.CLOSE_DOOR:
            if len(doors) != len(self.object_set) or self.objects_per_episode != 1:
                raise ConfigError(f"{self.name}: CloseDoor worlds hold exactly one door object")
        elif doors:
            raise ConfigError(f"{self.name}: PickPlace object_set cannot contain doors")
        else:
            for corner in self.task.target_region.corners():  # type: ignore[union-attr]
                if not self.table.contains(*corner):
                    raise ConfigError(f"{self.name}: target region lies outside the table")
        get_palette(self.gap.palette_id)

    # -- derived views ---------------------------------------------------

    def effective_init_region(self) -> Rect:
        return self.gap.init_region_override or self.init_region

    def placement_region(self) -> Rect:
        """Region object centers are drawn from, before the border rejection rule."""
        region = self.effective_init_region()
        if self.init_mode == "center":
            return region.inner(self.center_fraction)
        return region

    def border_core(self) -> Rect:
        """Interior excluded when init_mode is "border"."""
        return self.effective_init_region().inner(1.0 - 2.0 * self.border_band)

    def effective_camera(self) -> CameraConfig:
        return self.camera.offset(self.gap.camera_offset)

    def dynamics(self) -> DynamicsParams:
        return DynamicsParams(
            action_noise_std=self.gap.action_noise_std,
            geometry_scale=self.gap.geometry_scale,
            grasp_radius=self.grasp_radius,
            action_low=DEFAULTS.action_low,
            action_high=DEFAULTS.action_high,
        )

    @property
    def categories(self) -> Tuple[str, ...]:
        return tuple(sorted({o.category for o in self.object_set}))

    def with_gap(self, **changes: Any) -> "WorldConfig":
        return replace(self, gap=replace(self.gap, **changes))

    def evolve(self, **changes: Any) -> "WorldConfig":
        return replace(self, **changes)

    # -- serialization ---------------------------------------------------

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "task": self.task.to_dict(),
            "gap": self.gap.to_dict(),
            "camera": self.camera.to_dict(),
            "init_region": self.init_region.to_list(),
            "object_set": [o.to_dict() for o in self.object_set],
            "episode_horizon": int(self.episode_horizon),
            "seed_policy": self.seed_policy,
            "objects_per_episode": int(self.objects_per_episode),
            "object_yaw_range": float(self.object_yaw_range),
            "init_mode": self.init_mode,
            "border_band": float(self.border_band),
            "center_fraction": float(self.center_fraction),
            "home": self.home.to_list(),
            "source_tag": self.source_tag.value,
            "table": self.table.to_list(),
            "grasp_radius": float(self.grasp_radius),
        }

    @classmethod
    def from_dict(cls, entry: Dict[str, Any]) -> "WorldConfig":
        if "task" not in entry or "init_region" not in entry:
            raise ConfigError(f"world config needs 'task' and 'init_region' (got keys {sorted(entry)})")
        objects = entry.get("object_set") or entry.get("objects") or []
        home = entry.get("home")
        try:
            source_tag = SourceTag(entry.get("source_tag", SourceTag.REAL_PROXY.value))
        except ValueError as exc:
            raise ConfigError(f"unknown source_tag {entry.get('source_tag')!r}") from exc
        return cls(
            task=TaskSpec.from_dict(entry["task"]),
            init_region=Rect.from_seq(entry["init_region"]),
            object_set=tuple(resolve_object(o) for o in objects),
            name=str(entry.get("name", "world")),
            gap=GapConfig.from_dict(entry.get("gap") or {}),
            camera=CameraConfig.from_dict(entry.get("camera") or {}),
            episode_horizon=int(entry.get("episode_horizon", DEFAULTS.episode_horizon)),
            seed_policy=str(entry.get("seed_policy", "derived")),
            objects_per_episode=int(entry.get("objects_per_episode", 1)),
            object_yaw_range=float(entry.get("object_yaw_range", 0.0)),
            init_mode=str(entry.get("init_mode", "uniform")),
            border_band=float(entry.get("border_band", 0.2)),
            center_fraction=float(entry.get("center_fraction", 0.2)),
            home=Pose2.from_seq(home) if home is not None else DEFAULT_HOME,
            source_tag=source_tag,
            table=Rect.from_seq(entry.get("table", DEFAULTS.table)),
            grasp_radius=float(entry.get("grasp_radius", DEFAULTS.grasp_radius)),
        )
