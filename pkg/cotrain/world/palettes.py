from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Tuple

import yaml

from cotrain.errors import ConfigError
from cotrain.world.objects import CONTENT_DIR

logger = logging.getLogger(__name__)

RGB = Tuple[int, int, int]


@dataclass(frozen=True)
class Palette:
    id: str
    background: RGB
    table: RGB
    door: RGB
    ee_open: RGB
    ee_closed: RGB
    tint: Tuple[int, int, int] = (0, 0, 0)
    category_colors: Dict[str, RGB] = field(default_factory=dict)

    def object_color(self, category: str, base: RGB) -> RGB:
        color = self.category_colors.get(category, base)
        return tuple(max(0, min(255, int(c) + int(t))) for c, t in zip(color, self.tint))  # type: ignore[return-value]


PALETTES: Dict[str, Palette] = {}


def _rgb(value, fallback: RGB) -> RGB:
    if value is None:
        return fallback
    return tuple(int(c) for c in value)  # type: ignore[return-value]


def _build_palette(pid: str, spec: dict) -> Palette:
    return Palette(
        id=pid,
        background=_rgb(spec.get("background"), (20, 20, 24)),
        table=_rgb(spec.get("table"), (150, 120, 90)),
        door=_rgb(spec.get("door"), (110, 70, 35)),
        ee_open=_rgb(spec.get("ee_open"), (240, 240, 240)),
        ee_closed=_rgb(spec.get("ee_closed"), (255, 215, 0)),
        tint=_rgb(spec.get("tint"), (0, 0, 0)),
        category_colors={str(k): _rgb(v, (0, 0, 0)) for k, v in (spec.get("category_colors") or {}).items()},
    )


def load_palettes(path: Path | str | None = None) -> Dict[str, Palette]:
    if path is None:
        path = CONTENT_DIR / "palettes.yaml"
    path = Path(path)
    with path.open("r", encoding="utf-8") as f:
        data = yaml.safe_load(f) or {}
    PALETTES.clear()
    for pid, spec in data.items():
        PALETTES[str(pid)] = _build_palette(str(pid), spec or {})
    logger.debug("loaded %d palettes from %s", len(PALETTES), path)
    return PALETTES


def get_palette(palette_id: str) -> Palette:
    if not PALETTES:
        load_palettes()
    try:
        return PALETTES[palette_id]
    except KeyError:
        raise ConfigError(f"unknown palette id {palette_id!r}") from None
