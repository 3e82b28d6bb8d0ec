"""Logging setup: console output plus an optional append-only debug log file."""
from __future__ import annotations

import logging
import os
from pathlib import Path
from typing import Optional

_FORMAT = "%(asctime)s %(levelname)s [%(name)s] %(message)s"
_ROOT = "cotrain"


def configure(level: Optional[str] = None, debug_path: Optional[str | Path] = None) -> logging.Logger:
    """Install handlers on the package logger. Safe to call more than once."""
    level = level or os.environ.get("COTRAIN_LOG_LEVEL", "INFO")
    debug_path = debug_path or os.environ.get("COTRAIN_DEBUG_LOG") or None

    root = logging.getLogger(_ROOT)
    root.setLevel(logging.DEBUG if debug_path else level.upper())

    if not any(getattr(h, "_cotrain_console", False) for h in root.handlers):
        console = logging.StreamHandler()
        console.setFormatter(logging.Formatter(_FORMAT))
        console.setLevel(level.upper())
        console._cotrain_console = True  # type: ignore[attr-defined]
        root.addHandler(console)

    if debug_path and not any(getattr(h, "_cotrain_debug", None) == str(debug_path) for h in root.handlers):
        handler = logging.FileHandler(debug_path, mode="a", encoding="utf-8")
        handler.setFormatter(logging.Formatter(_FORMAT))
        handler.setLevel(logging.DEBUG)
        handler._cotrain_debug = str(debug_path)  # type: ignore[attr-defined]
        root.addHandler(handler)
    return root
