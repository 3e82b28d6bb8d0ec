"""Checkpoint snapshots and their `.ckpt` file format.

A file is one UTF-8 JSON header line, then the raw little-endian float64
arrays listed in header["arrays"] in order.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from cotrain.errors import CorruptCheckpoint
from cotrain.policy.network import PolicyParams

logger = logging.getLogger(__name__)

FORMAT = "cotrain-ckpt"
VERSION = 1
_NORM_FIELDS = ("obs_mean", "obs_std", "action_offset", "action_scale", "action_low", "action_high")


@dataclass
class Checkpoint:
    params: PolicyParams
    step: int
    train_loss: float
    seed: Optional[int] = None


def _named_arrays(params: PolicyParams) -> List[Tuple[str, np.ndarray]]:
    named: List[Tuple[str, np.ndarray]] = []
    for i, (W, b) in enumerate(params.layers):
        named.append((f"W{i}", W))
        named.append((f"b{i}", b))
    for name in _NORM_FIELDS:
        named.append((name, getattr(params, name)))
    return named


def save_checkpoint(ckpt: Checkpoint, path: str | Path, extra: Optional[Dict[str, Any]] = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    named = _named_arrays(ckpt.params)
    header = {
        "format": FORMAT,
        "version": VERSION,
        "dims": ckpt.params.dims,
        "step": int(ckpt.step),
        "seed": ckpt.seed,
        "train_loss": float(ckpt.train_loss),
        "arrays": [[name, list(arr.shape)] for name, arr in named],
    }
    if extra:
        header["extra"] = extra
    with path.open("wb") as f:
        f.write(json.dumps(header, sort_keys=True).encode("utf-8") + b"\n")
        for _, arr in named:
            f.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())
    logger.debug("saved checkpoint step %d to %s", ckpt.step, path)
    return path


def read_header(path: str | Path) -> Dict[str, Any]:
    with Path(path).open("rb") as f:
        line = f.readline()
    try:
        header = json.loads(line.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CorruptCheckpoint(f"corrupt checkpoint header in {path}: {exc}") from exc
    if header.get("format") != FORMAT or header.get("version") != VERSION:
        raise CorruptCheckpoint(f"{path} is not a {FORMAT} v{VERSION} file")
    return header


def load_checkpoint(path: str | Path) -> Checkpoint:
    path = Path(path)
    if not path.is_file():
        raise CorruptCheckpoint(f"checkpoint not found: {path}")
    raw = path.read_bytes()
    newline = raw.find(b"\n")
    if newline < 0:
        raise CorruptCheckpoint(f"corrupt checkpoint: {path} has no header line")
    header = read_header(path)
    body = raw[newline + 1 :]

    arrays: Dict[str, np.ndarray] = {}
    offset = 0
    for name, shape in header["arrays"]:
        count = int(np.prod(shape)) if shape else 1
        nbytes = count * 8
        if offset + nbytes > len(body):
            raise CorruptCheckpoint(f"corrupt checkpoint: {path} truncated at array {name!r}")
        arrays[name] = np.frombuffer(body, dtype="<f8", count=count, offset=offset).reshape(shape).astype(np.float64)
        offset += nbytes
    if offset != len(body):
        raise CorruptCheckpoint(f"corrupt checkpoint: {path} has {len(body) - offset} trailing bytes")

    n_layers = len(header["dims"]) - 1
    params = PolicyParams(
        layers=[(arrays[f"W{i}"], arrays[f"b{i}"]) for i in range(n_layers)],
        **{name: arrays[name] for name in _NORM_FIELDS},
    )
    return Checkpoint(
        params=params,
        step=int(header["step"]),
        train_loss=float(header["train_loss"]),
        seed=header.get("seed"),
    )
