"""Planar poses and axis-aligned regions."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple

Vec2 = Tuple[float, float]

TWO_PI = 2.0 * math.pi


def wrap_angle(angle: float) -> float:
    """Wrap an angle in radians into (-pi, pi]."""
    wrapped = math.remainder(angle, TWO_PI)
    if wrapped <= -math.pi:
        wrapped += TWO_PI
    return wrapped


def rotate_point(px: float, py: float, cx: float, cy: float, rad: float) -> Vec2:
    s = math.sin(rad)
    c = math.cos(rad)
    tx = px - cx
    ty = py - cy
    return (tx * c - ty * s + cx, tx * s + ty * c + cy)


@dataclass(frozen=True)
class Pose2:
    """SE(2) pose: meters and radians, theta kept in (-pi, pi]."""

    x: float = 0.0
    y: float = 0.0
    theta: float = 0.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.theta)):
            raise ValueError(f"Pose2 requires finite values, got ({self.x}, {self.y}, {self.theta})")
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        object.__setattr__(self, "theta", wrap_angle(float(self.theta)))

    @classmethod
    def identity(cls) -> "Pose2":
        return cls(0.0, 0.0, 0.0)

    @classmethod
    def from_seq(cls, values: Sequence[float]) -> "Pose2":
        if len(values) == 2:
            return cls(values[0], values[1], 0.0)
        return cls(values[0], values[1], values[2])

    def to_list(self) -> list:
        return [self.x, self.y, self.theta]

    @property
    def xy(self) -> Vec2:
        return (self.x, self.y)

    def compose(self, other: "Pose2") -> "Pose2":
        """self ∘ other: apply `other` expressed in this pose's frame."""
        c = math.cos(self.theta)
        s = math.sin(self.theta)
        return Pose2(
            self.x + c * other.x - s * other.y,
            self.y + s * other.x + c * other.y,
            self.theta + other.theta,
        )

    def inverse(self) -> "Pose2":
        c = math.cos(self.theta)
        s = math.sin(self.theta)
        return Pose2(-c * self.x - s * self.y, s * self.x - c * self.y, -self.theta)

    def relative_to(self, frame: "Pose2") -> "Pose2":
        """This pose expressed in `frame` (frame⁻¹ ∘ self)."""
        return frame.inverse().compose(self)

    def transform_point(self, px: float, py: float) -> Vec2:
        c = math.cos(self.theta)
        s = math.sin(self.theta)
        return (self.x + c * px - s * py, self.y + s * px + c * py)

    def distance_to(self, other: "Pose2") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)

    def is_close(self, other: "Pose2", tol: float = 1e-9) -> bool:
        return (
            abs(self.x - other.x) <= tol
            and abs(self.y - other.y) <= tol
            and abs(wrap_angle(self.theta - other.theta)) <= tol
        )


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle [x0, x1] x [y0, y1] in meters."""

    x0: float
    y0: float
    x1: float
    y1: float

    @classmethod
    def from_seq(cls, values: Sequence[float]) -> "Rect":
        if len(values) != 4:
            raise ValueError(f"Rect needs 4 values (x0, y0, x1, y1), got {list(values)}")
        return cls(*(float(v) for v in values))

    def to_list(self) -> list:
        return [self.x0, self.y0, self.x1, self.y1]

    @property
    def width(self) -> float:
        return self.x1 - self.x0

    @property
    def height(self) -> float:
        return self.y1 - self.y0

    @property
    def area(self) -> float:
        return max(0.0, self.width) * max(0.0, self.height)

    @property
    def center(self) -> Vec2:
        return ((self.x0 + self.x1) / 2.0, (self.y0 + self.y1) / 2.0)

    def contains(self, x: float, y: float, tol: float = 0.0) -> bool:
        return (self.x0 - tol <= x <= self.x1 + tol) and (self.y0 - tol <= y <= self.y1 + tol)

    def contains_rect(self, other: "Rect") -> bool:
        return self.x0 <= other.x0 and self.y0 <= other.y0 and other.x1 <= self.x1 and other.y1 <= self.y1

    def intersection(self, other: "Rect") -> float:
        w = min(self.x1, other.x1) - max(self.x0, other.x0)
        h = min(self.y1, other.y1) - max(self.y0, other.y0)
        if w <= 0 or h <= 0:
            return 0.0
        return w * h

    def iou(self, other: "Rect") -> float:
        inter = self.intersection(other)
        union = self.area + other.area - inter
        if union <= 0:
            return 1.0 if self == other else 0.0
        return inter / union

    def disjoint(self, other: "Rect") -> bool:
        return self.intersection(other) == 0.0

    def bounds_union(self, other: "Rect") -> "Rect":
        return Rect(min(self.x0, other.x0), min(self.y0, other.y0), max(self.x1, other.x1), max(self.y1, other.y1))

    def inner(self, fraction: float) -> "Rect":
        """Centered sub-rectangle spanning `fraction` of each dimension."""
        cx, cy = self.center
        hw = self.width * fraction / 2.0
        hh = self.height * fraction / 2.0
        return Rect(cx - hw, cy - hh, cx + hw, cy + hh)

    def clamp(self, x: float, y: float) -> Vec2:
        return (min(max(x, self.x0), self.x1), min(max(y, self.y0), self.y1))

    def corners(self) -> Iterable[Vec2]:
        return ((self.x0, self.y0), (self.x1, self.y0), (self.x1, self.y1), (self.x0, self.y1))
