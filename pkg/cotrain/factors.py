"""Composition factors shared by datasets and worlds: camera and dynamics."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, Tuple

from cotrain.config import DEFAULTS
from cotrain.geometry import Pose2


@dataclass(frozen=True)
class CameraConfig:
    """View window over the table: its pose, size in meters, and pixel resolution (rows, cols)."""

    center: Pose2 = field(default_factory=lambda: Pose2(0.4, 0.4, 0.0))
    window: Tuple[float, float] = (0.8, 0.8)
    resolution: Tuple[int, int] = (DEFAULTS.image_height, DEFAULTS.image_width)

    def __post_init__(self) -> None:
        if self.window[0] <= 0 or self.window[1] <= 0:
            raise ValueError(f"camera window must be positive, got {self.window}")
        if self.resolution[0] < 1 or self.resolution[1] < 1:
            raise ValueError(f"camera resolution must be positive, got {self.resolution}")

    def offset(self, delta: Pose2) -> "CameraConfig":
        """Camera moved by `delta` expressed in its own frame (cam ⊕ delta)."""
        return CameraConfig(center=self.center.compose(delta), window=self.window, resolution=self.resolution)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "center": self.center.to_list(),
            "window": [float(self.window[0]), float(self.window[1])],
            "resolution": [int(self.resolution[0]), int(self.resolution[1])],
        }

    @classmethod
    def from_dict(cls, entry: Dict[str, Any]) -> "CameraConfig":
        base = cls()
        center = entry.get("center")
        window = entry.get("window", base.window)
        resolution = entry.get("resolution", base.resolution)
        return cls(
            center=Pose2.from_seq(center) if center is not None else base.center,
            window=(float(window[0]), float(window[1])),
            resolution=(int(resolution[0]), int(resolution[1])),
        )


@dataclass(frozen=True)
class DynamicsParams:
    """Everything about how commanded actions turn into motion."""

    action_noise_std: float = 0.0
    geometry_scale: float = 1.0
    grasp_radius: float = DEFAULTS.grasp_radius
    action_low: Tuple[float, ...] = DEFAULTS.action_low
    action_high: Tuple[float, ...] = DEFAULTS.action_high

    @property
    def action_dim(self) -> int:
        return len(self.action_low)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "action_noise_std": float(self.action_noise_std),
            "geometry_scale": float(self.geometry_scale),
            "grasp_radius": float(self.grasp_radius),
            "action_low": [float(v) for v in self.action_low],
            "action_high": [float(v) for v in self.action_high],
        }

    @classmethod
    def from_dict(cls, entry: Dict[str, Any]) -> "DynamicsParams":
        base = cls()
        return cls(
            action_noise_std=float(entry.get("action_noise_std", base.action_noise_std)),
            geometry_scale=float(entry.get("geometry_scale", base.geometry_scale)),
            grasp_radius=float(entry.get("grasp_radius", base.grasp_radius)),
            action_low=tuple(float(v) for v in entry.get("action_low", base.action_low)),
            action_high=tuple(float(v) for v in entry.get("action_high", base.action_high)),
        )

    def numeric_fields(self) -> Dict[str, float]:
        return {
            "action_noise_std": self.action_noise_std,
            "geometry_scale": self.geometry_scale,
            "grasp_radius": self.grasp_radius,
        }
