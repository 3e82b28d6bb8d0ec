"""Experiment configuration, loaded from YAML the same way world presets are."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import yaml

from cotrain.errors import ConfigError
from cotrain.geometry import Pose2
from cotrain.policy.train import TrainConfig
from cotrain.world.objects import CONTENT_DIR
from cotrain.world.presets import world_from_entry
from cotrain.world.spec import WorldConfig

logger = logging.getLogger(__name__)

EXPERIMENTS_DIR = CONTENT_DIR / "experiments"

DEFAULT_ALPHA_GRID = (0.0, 0.5, 0.9, 0.99, 0.995, 0.999)
DEFAULT_REAL_COUNTS = (10, 25, 50, 100)
DEFAULT_SIM_COUNTS = (50, 200, 1000)
# sim-only camera delta for the misaligned condition: dx, dy (m), dtheta (rad)
DEFAULT_MISALIGNMENT = Pose2(0.1, 0.08, 0.35)

# seen category for real demos; sim adds one instance per unseen category; eval uses the others
DEFAULT_SEEN_OBJECTS = ("cup_red", "cup_white")
DEFAULT_SIM_EXTRA_OBJECTS = ("lemon_a", "cucumber_a")
DEFAULT_UNSEEN_OBJECTS = ("lemon_b", "cucumber_b")

DEFAULT_ACCEPTANCE = {
    "cotrain_margin": 0.10,
    "unseen_position_margin": 0.10,
    "real_scaling_margin": 0.0,
    "inversions_allowed": 1,
}


class Protocol(str, Enum):
    MIX_TABLE = "MixTable"
    RATIO_SWEEP = "RatioSweep"
    REAL_SCALING = "RealScaling"
    SIM_QUANTITY = "SimQuantity"
    CAMERA_ABLATION = "CameraAblation"
    UNSEEN_POSITIONS = "UnseenPositions"
    UNSEEN_OBJECTS = "UnseenObjects"


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    protocol: Protocol
    world_real: WorldConfig
    world_dc: WorldConfig
    worlds_prior: Tuple[WorldConfig, ...] = ()
    n_real_demos: int = 10
    n_dc_demos: int = 1000
    n_prior_demos: int = 500
    # source demos collected with the expert in each sim world before multiplication
    n_sim_sources: int = 10
    alpha: float = 0.99
    alpha_grid: Tuple[float, ...] = DEFAULT_ALPHA_GRID
    real_count_grid: Tuple[int, ...] = DEFAULT_REAL_COUNTS
    sim_count_grid: Tuple[int, ...] = DEFAULT_SIM_COUNTS
    eval_episodes: int = 100
    seeds: Tuple[int, ...] = (0, 1, 2)
    train: TrainConfig = field(default_factory=TrainConfig)
    camera_misalignment: Pose2 = DEFAULT_MISALIGNMENT
    # adds a real-only row to the camera ablation
    camera_baseline: bool = False
    # adds in-distribution evaluations (border positions, seen objects)
    sanity_rows: bool = False
    seen_objects: Tuple[str, ...] = DEFAULT_SEEN_OBJECTS
    sim_extra_objects: Tuple[str, ...] = DEFAULT_SIM_EXTRA_OBJECTS
    unseen_objects: Tuple[str, ...] = DEFAULT_UNSEEN_OBJECTS
    cache_dir: Optional[str] = None
    threads: Optional[int] = None
    acceptance: Dict[str, float] = field(default_factory=lambda: dict(DEFAULT_ACCEPTANCE))

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        if not self.seeds:
            raise ConfigError(f"{self.name}: seeds must be nonempty")
        if self.eval_episodes < 1:
            raise ConfigError(f"{self.name}: eval_episodes must be >= 1")
        if not (0.0 <= self.alpha <= 1.0):
            raise ConfigError(f"{self.name}: alpha must be in [0, 1], got {self.alpha}")
        if self.n_real_demos < 1 or self.n_sim_sources < 1:
            raise ConfigError(f"{self.name}: n_real_demos and n_sim_sources must be >= 1")
        if self.n_dc_demos < 0 or self.n_prior_demos < 0:
            raise ConfigError(f"{self.name}: sim demo counts must be >= 0")
        grids = {
            Protocol.RATIO_SWEEP: ("alpha_grid", self.alpha_grid),
            Protocol.REAL_SCALING: ("real_count_grid", self.real_count_grid),
            Protocol.SIM_QUANTITY: ("sim_count_grid", self.sim_count_grid),
        }
        if self.protocol in grids:
            label, grid = grids[self.protocol]
            if not grid:
                raise ConfigError(f"{self.name}: {label} must be nonempty for {self.protocol.value}")
        if any(not (0.0 <= a <= 1.0) for a in self.alpha_grid):
            raise ConfigError(f"{self.name}: alpha_grid values must be in [0, 1]")
        if any(c < 1 for c in self.real_count_grid) or any(c < 0 for c in self.sim_count_grid):
            raise ConfigError(f"{self.name}: count grids hold demo counts")
        if self.protocol == Protocol.MIX_TABLE and not self.worlds_prior:
            raise ConfigError(f"{self.name}: MixTable needs at least one prior world")
        if self.protocol == Protocol.UNSEEN_OBJECTS:
            seen = set(self.seen_objects)
            if seen & set(self.unseen_objects) or seen & set(self.sim_extra_objects):
                raise ConfigError(f"{self.name}: seen and unseen object sets overlap")

    @property
    def label(self) -> str:
        return self.protocol.value

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "protocol": self.protocol.value,
            "world_real": self.world_real.to_dict(),
            "world_dc": self.world_dc.to_dict(),
            "worlds_prior": [w.to_dict() for w in self.worlds_prior],
            "n_real_demos": self.n_real_demos,
            "n_dc_demos": self.n_dc_demos,
            "n_prior_demos": self.n_prior_demos,
            "n_sim_sources": self.n_sim_sources,
            "alpha": self.alpha,
            "alpha_grid": list(self.alpha_grid),
            "real_count_grid": list(self.real_count_grid),
            "sim_count_grid": list(self.sim_count_grid),
            "eval_episodes": self.eval_episodes,
            "seeds": list(self.seeds),
            "train": self.train.to_dict(),
            "camera_misalignment": self.camera_misalignment.to_list(),
            "camera_baseline": self.camera_baseline,
            "sanity_rows": self.sanity_rows,
            "seen_objects": list(self.seen_objects),
            "sim_extra_objects": list(self.sim_extra_objects),
            "unseen_objects": list(self.unseen_objects),
            "cache_dir": self.cache_dir,
            "threads": self.threads,
            "acceptance": dict(self.acceptance),
        }

    @classmethod
    def from_dict(cls, entry: Dict[str, Any]) -> "ExperimentConfig":
        for key in ("protocol", "world_real", "world_dc"):
            if key not in entry:
                raise ConfigError(f"experiment config needs {key!r} (got keys {sorted(entry)})")
        try:
            protocol = Protocol(entry["protocol"])
        except ValueError:
            known = [p.value for p in Protocol]
            raise ConfigError(f"unknown protocol {entry['protocol']!r}; known: {known}") from None
        acceptance = dict(DEFAULT_ACCEPTANCE)
        acceptance.update(entry.get("acceptance") or {})
        misalignment = entry.get("camera_misalignment")
        threads = entry.get("threads")
        return cls(
            name=str(entry.get("name", protocol.value)),
            protocol=protocol,
            world_real=world_from_entry(entry["world_real"]),
            world_dc=world_from_entry(entry["world_dc"]),
            worlds_prior=tuple(world_from_entry(w) for w in entry.get("worlds_prior") or ()),
            n_real_demos=int(entry.get("n_real_demos", 10)),
            n_dc_demos=int(entry.get("n_dc_demos", 1000)),
            n_prior_demos=int(entry.get("n_prior_demos", 500)),
            n_sim_sources=int(entry.get("n_sim_sources", 10)),
            alpha=float(entry.get("alpha", 0.99)),
            alpha_grid=tuple(float(a) for a in entry.get("alpha_grid", DEFAULT_ALPHA_GRID)),
            real_count_grid=tuple(int(c) for c in entry.get("real_count_grid", DEFAULT_REAL_COUNTS)),
            sim_count_grid=tuple(int(c) for c in entry.get("sim_count_grid", DEFAULT_SIM_COUNTS)),
            eval_episodes=int(entry.get("eval_episodes", 100)),
            seeds=tuple(int(s) for s in entry.get("seeds", (0, 1, 2))),
            train=TrainConfig.from_dict(entry.get("train") or {}),
            camera_misalignment=Pose2.from_seq(misalignment) if misalignment is not None else DEFAULT_MISALIGNMENT,
            camera_baseline=bool(entry.get("camera_baseline", False)),
            sanity_rows=bool(entry.get("sanity_rows", False)),
            seen_objects=tuple(entry.get("seen_objects", DEFAULT_SEEN_OBJECTS)),
            sim_extra_objects=tuple(entry.get("sim_extra_objects", DEFAULT_SIM_EXTRA_OBJECTS)),
            unseen_objects=tuple(entry.get("unseen_objects", DEFAULT_UNSEEN_OBJECTS)),
            cache_dir=entry.get("cache_dir"),
            threads=int(threads) if threads is not None else None,
            acceptance=acceptance,
        )


def load_experiment(path: Path | str) -> ExperimentConfig:
    """Read an experiment config; a bare name resolves against the shipped content/experiments."""
    path = Path(path)
    if not path.exists() and not path.suffix:
        path = EXPERIMENTS_DIR / f"{path.name}.yaml"
    if not path.exists():
        raise ConfigError(f"experiment config not found: {path}")
    with path.open("r", encoding="utf-8") as f:
        data = yaml.safe_load(f)
    if not isinstance(data, dict):
        raise ConfigError(f"experiment config must be a mapping: {path}")
    cfg = ExperimentConfig.from_dict(data)
    logger.debug("loaded experiment %s (%s) from %s", cfg.name, cfg.protocol.value, path)
    return cfg


def config_summary(cfg: ExperimentConfig) -> List[str]:
    return [
        f"experiment {cfg.name} ({cfg.protocol.value})",
        f"  real: {cfg.world_real.name} x{cfg.n_real_demos}",
        f"  dc:   {cfg.world_dc.name} x{cfg.n_dc_demos}",
        f"  prior: {', '.join(w.name for w in cfg.worlds_prior) or '-'} x{cfg.n_prior_demos}",
        f"  seeds {list(cfg.seeds)}, {cfg.eval_episodes} eval episodes, {cfg.train.steps} train steps",
    ]
