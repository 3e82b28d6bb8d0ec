from __future__ import annotations

import copy
import logging
from pathlib import Path
from typing import Any, Dict

import yaml

from cotrain.errors import ConfigError
from cotrain.world.objects import CONTENT_DIR
from cotrain.world.spec import WorldConfig

logger = logging.getLogger(__name__)

PRESET_KEY = "preset"

# raw (merged) entries, then the built configs
_RAW_PRESETS: Dict[str, Dict[str, Any]] = {}
WORLD_PRESETS: Dict[str, WorldConfig] = {}


def merge_entry(base: Dict[str, Any], overrides: Dict[str, Any]) -> Dict[str, Any]:
    """Recursive dict merge; `overrides` wins, nested mappings merge key by key."""
    out = copy.deepcopy(base)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = merge_entry(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def _expand(entry: Dict[str, Any], known: Dict[str, Dict[str, Any]]) -> Dict[str, Any]:
    entry = dict(entry)
    parent = entry.pop(PRESET_KEY, None)
    if parent is None:
        return entry
    if parent not in known:
        raise ConfigError(f"unknown preset {parent!r}")
    return merge_entry(known[parent], entry)


def load_world_presets(path: Path | str | None = None) -> Dict[str, WorldConfig]:
    """Load world presets from YAML and populate WORLD_PRESETS."""
    if path is None:
        path = CONTENT_DIR / "worlds.yaml"
    path = Path(path)
    with path.open("r", encoding="utf-8") as f:
        data = yaml.safe_load(f) or {}
    _RAW_PRESETS.clear()
    WORLD_PRESETS.clear()
    for name, spec in data.items():
        raw = _expand(spec or {}, _RAW_PRESETS)
        raw["name"] = str(name)
        _RAW_PRESETS[str(name)] = raw
        WORLD_PRESETS[str(name)] = WorldConfig.from_dict(raw)
    logger.debug("loaded %d world presets from %s", len(WORLD_PRESETS), path)
    return WORLD_PRESETS


def _ensure_loaded() -> None:
    if not WORLD_PRESETS:
        load_world_presets()


def get_preset(name: str) -> WorldConfig:
    _ensure_loaded()
    try:
        return WORLD_PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown world preset {name!r}; known: {sorted(WORLD_PRESETS)}") from None


def world_from_entry(entry: Any) -> WorldConfig:
    """Build a WorldConfig from a preset name, or a mapping with optional `preset:` plus overrides."""
    if isinstance(entry, WorldConfig):
        return entry
    if isinstance(entry, str):
        return get_preset(entry)
    if not isinstance(entry, dict):
        raise ConfigError(f"world entry must be a preset name or a mapping, got {entry!r}")
    if PRESET_KEY in entry:
        _ensure_loaded()
        base_name = entry[PRESET_KEY]
        if base_name not in _RAW_PRESETS:
            raise ConfigError(f"unknown world preset {base_name!r}")
        raw = merge_entry(_RAW_PRESETS[base_name], {k: v for k, v in entry.items() if k != PRESET_KEY})
        return WorldConfig.from_dict(raw)
    return WorldConfig.from_dict(entry)


def load_world_file(path: Path | str) -> WorldConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"world file not found: {path}")
    with path.open("r", encoding="utf-8") as f:
        data = yaml.safe_load(f)
    if data is None:
        raise ConfigError(f"world file is empty: {path}")
    return world_from_entry(data)
