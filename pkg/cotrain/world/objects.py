from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Iterable, Tuple

import yaml

from cotrain.errors import ConfigError

logger = logging.getLogger(__name__)

CONTENT_DIR = Path(__file__).resolve().parent.parent / "content"

DOOR_CATEGORY = "door"


@dataclass(frozen=True)
class ObjectSpec:
    id: str
    category: str
    radius: float
    color: Tuple[int, int, int]

    @property
    def is_door(self) -> bool:
        return self.category == DOOR_CATEGORY

    def to_dict(self) -> Dict[str, Any]:
        return {
            "id": self.id,
            "category": self.category,
            "radius": float(self.radius),
            "color": [int(c) for c in self.color],
        }


OBJECT_SPECS: Dict[str, ObjectSpec] = {}


def build_object_spec(entry: dict) -> ObjectSpec:
    try:
        spec = ObjectSpec(
            id=str(entry["id"]),
            category=str(entry["category"]),
            radius=float(entry.get("radius", 0.04)),
            color=tuple(int(c) for c in entry.get("color", (200, 200, 200))),  # type: ignore[arg-type]
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad object entry {entry!r}: {exc}") from exc
    if spec.radius <= 0:
        raise ConfigError(f"object {spec.id!r} needs a positive radius, got {spec.radius}")
    if len(spec.color) != 3:
        raise ConfigError(f"object {spec.id!r} color must be RGB, got {spec.color}")
    return spec


def load_object_specs(path: Path | str | None = None) -> Dict[str, ObjectSpec]:
    """Load object instances from YAML and populate OBJECT_SPECS."""
    if path is None:
        path = CONTENT_DIR / "objects.yaml"
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Object file not found: {path}")
    data = yaml.safe_load(path.read_text(encoding="utf-8"))
    if not isinstance(data, Iterable):
        raise ConfigError(f"Object file malformed: {path}")
    OBJECT_SPECS.clear()
    for entry in data:
        spec = build_object_spec(entry)
        OBJECT_SPECS[spec.id] = spec
    logger.debug("loaded %d object specs from %s", len(OBJECT_SPECS), path)
    return OBJECT_SPECS


def get_object_spec(object_id: str) -> ObjectSpec:
    if not OBJECT_SPECS:
        load_object_specs()
    try:
        return OBJECT_SPECS[object_id]
    except KeyError:
        raise ConfigError(f"unknown object id {object_id!r}") from None


def resolve_object(entry: Any) -> ObjectSpec:
    """An object_set entry is either a registry id or an inline mapping."""
    if isinstance(entry, ObjectSpec):
        return entry
    if isinstance(entry, str):
        return get_object_spec(entry)
    if isinstance(entry, dict):
        return build_object_spec(entry)
    raise ConfigError(f"cannot resolve object entry {entry!r}")
