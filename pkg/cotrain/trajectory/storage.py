"""Dataset directory container.

Layout::

    <dir>/manifest.json     UTF-8 JSON, schema_version 1
    <dir>/traj_<index>.bin  one blob per trajectory

Blob layout (little-endian): magic b"CTFJ1", then u32 frame count, u32 H,
u32 W, u32 proprio dim, u32 action dim; then frame-major records of
H*W*3 uint8 image bytes, proprio float64s, action float64s.
"""
from __future__ import annotations

import json
import logging
import struct
from dataclasses import replace
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np

from cotrain.errors import CorruptManifest, CorruptTrajectory, DimensionMismatch, MissingTrajectory, SourceMismatch
from cotrain.trajectory.types import (
    CompositionManifest,
    Dataset,
    GeneratorKind,
    ObjectRecord,
    SourceTag,
    Trajectory,
)

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
MAGIC = b"CTFJ1"
_HEADER = struct.Struct("<5sIIIII")
MANIFEST_NAME = "manifest.json"


def _frame_dtype(height: int, width: int, proprio_dim: int, action_dim: int) -> np.dtype:
    return np.dtype(
        [
            ("image", np.uint8, (height, width, 3)),
            ("proprio", "<f8", (proprio_dim,)),
            ("action", "<f8", (action_dim,)),
        ]
    )


def trajectory_blob(t: Trajectory) -> bytes:
    frames, height, width, _ = t.images.shape
    dtype = _frame_dtype(height, width, t.proprio_dim, t.action_dim)
    records = np.empty(frames, dtype=dtype)
    records["image"] = t.images
    records["proprio"] = t.proprio
    records["action"] = t.actions
    header = _HEADER.pack(MAGIC, frames, height, width, t.proprio_dim, t.action_dim)
    return header + records.tobytes()


def parse_blob(blob: bytes, name: str = "<blob>"):
    """Decode a trajectory blob into (images, proprio, actions)."""
    if len(blob) < _HEADER.size:
        raise CorruptTrajectory(f"corrupt trajectory: {name} is shorter than its header")
    magic, frames, height, width, proprio_dim, action_dim = _HEADER.unpack_from(blob, 0)
    if magic != MAGIC:
        raise CorruptTrajectory(f"corrupt trajectory: {name} has bad magic {magic!r}")
    dtype = _frame_dtype(height, width, proprio_dim, action_dim)
    expected = _HEADER.size + frames * dtype.itemsize
    if len(blob) != expected:
        raise CorruptTrajectory(f"corrupt trajectory: {name} has {len(blob)} bytes, expected {expected}")
    records = np.frombuffer(blob, dtype=dtype, count=frames, offset=_HEADER.size)
    images = np.array(records["image"], dtype=np.uint8)
    proprio = np.array(records["proprio"], dtype=np.float64)
    actions = np.array(records["action"], dtype=np.float64)
    return images, proprio, actions


def _trajectory_meta(t: Trajectory, filename: str) -> Dict[str, Any]:
    return {
        "file": filename,
        "frames": len(t),
        "task_id": t.task_id,
        "success": float(t.success),
        "source": t.source.value,
        "seed": int(t.seed),
        "generator": t.generator.value,
        "objects": [[o.instance_id, o.category] for o in t.objects],
        "palette_id": t.palette_id,
    }


def save_dataset(d: Dataset, path: str | Path) -> Path:
    """Write `d` as a dataset directory. The caller must hold exclusive access to `path`."""
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    entries = []
    for index, traj in enumerate(d.trajectories):
        filename = f"traj_{index}.bin"
        (root / filename).write_bytes(trajectory_blob(traj))
        entries.append(_trajectory_meta(traj, filename))
    doc = {
        "schema_version": SCHEMA_VERSION,
        "name": d.name,
        "source": d.source.value,
        "manifest": d.manifest.to_dict(),
        "world": d.world_spec,
        "trajectories": entries,
    }
    # manifest last: a directory without one is an incomplete write
    (root / MANIFEST_NAME).write_text(json.dumps(doc, indent=2, sort_keys=True), encoding="utf-8")
    logger.info("saved dataset %r (%d trajectories) to %s", d.name, len(d.trajectories), root)
    return root


def _read_manifest(root: Path) -> Dict[str, Any]:
    manifest_path = root / MANIFEST_NAME
    if not manifest_path.is_file():
        raise CorruptManifest(f"corrupt manifest: {manifest_path} not found")
    try:
        doc = json.loads(manifest_path.read_text(encoding="utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CorruptManifest(f"corrupt manifest: {manifest_path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise CorruptManifest(f"corrupt manifest: {manifest_path} is not a JSON object")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise CorruptManifest(f"corrupt manifest: unsupported schema_version {version!r}")
    for key in ("name", "source", "manifest", "trajectories"):
        if key not in doc:
            raise CorruptManifest(f"corrupt manifest: missing key {key!r}")
    return doc


def load_dataset(path: str | Path) -> Dataset:
    root = Path(path)
    doc = _read_manifest(root)
    try:
        manifest = CompositionManifest.from_dict(doc["manifest"])
        source = SourceTag(doc["source"])
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptManifest(f"corrupt manifest: {exc}") from exc

    rows, cols = manifest.camera.resolution
    dims: Optional[tuple] = None
    trajectories = []
    for entry in doc["trajectories"]:
        try:
            filename = entry["file"]
            meta = dict(
                task_id=str(entry["task_id"]),
                success=float(entry["success"]),
                source=SourceTag(entry["source"]),
                seed=int(entry["seed"]),
                generator=GeneratorKind(entry.get("generator", GeneratorKind.HUMAN_PROXY.value)),
                objects=tuple(ObjectRecord(str(i), str(c)) for i, c in entry.get("objects", [])),
                palette_id=str(entry.get("palette_id", "default")),
            )
            expected_frames = int(entry["frames"])
        except (KeyError, TypeError, ValueError) as exc:
            raise CorruptManifest(f"corrupt manifest: bad trajectory entry {entry!r}: {exc}") from exc

        blob_path = root / filename
        if not blob_path.is_file():
            raise MissingTrajectory(f"missing trajectory file: {blob_path}")
        images, proprio, actions = parse_blob(blob_path.read_bytes(), name=filename)
        if images.shape[0] != expected_frames:
            raise CorruptTrajectory(
                f"corrupt trajectory: {filename} holds {images.shape[0]} frames, manifest says {expected_frames}"
            )
        if images.shape[1:3] != (rows, cols):
            raise DimensionMismatch(
                f"dimension mismatch: {filename} images are {images.shape[1:3]}, manifest camera is {(rows, cols)}"
            )
        traj_dims = (proprio.shape[1], actions.shape[1])
        if dims is None:
            dims = traj_dims
        elif traj_dims != dims:
            raise DimensionMismatch(f"dimension mismatch: {filename} has (proprio, action) dims {traj_dims}, expected {dims}")
        trajectories.append(Trajectory(images=images, proprio=proprio, actions=actions, **meta))

    logger.debug("loaded dataset %r (%d trajectories) from %s", doc["name"], len(trajectories), root)
    return Dataset(
        trajectories=trajectories,
        manifest=manifest,
        source=source,
        name=str(doc["name"]),
        world_spec=doc.get("world"),
    )


def concat_datasets(a: Dataset, b: Dataset, source: Optional[SourceTag] = None, name: Optional[str] = None) -> Dataset:
    """Pool two datasets. Manifest fields become unions; trajectories keep their own tags."""
    if not a.trajectories:
        return replace(b, trajectories=list(b.trajectories), source=source or b.source, name=name or b.name)
    if not b.trajectories:
        return replace(a, trajectories=list(a.trajectories), source=source or a.source, name=name or a.name)

    if a.image_shape != b.image_shape or a.proprio_dim != b.proprio_dim or a.action_dim != b.action_dim:
        raise DimensionMismatch(
            f"dimension mismatch: {a.name!r} {(a.image_shape, a.proprio_dim, a.action_dim)} vs "
            f"{b.name!r} {(b.image_shape, b.proprio_dim, b.action_dim)}"
        )
    if source is None:
        if a.source != b.source:
            raise SourceMismatch(
                f"source tags differ ({a.source.value} vs {b.source.value}); pass source= to override"
            )
        source = a.source

    ma, mb = a.manifest, b.manifest
    if ma.camera != mb.camera:
        logger.warning("concat %r + %r: cameras differ, keeping the first", a.name, b.name)
    if ma.dynamics != mb.dynamics:
        logger.warning("concat %r + %r: dynamics differ, keeping the first", a.name, b.name)
    instances: Dict[str, set] = {}
    for m in (ma, mb):
        for cat, ids in m.instances.items():
            instances.setdefault(cat, set()).update(ids)
    manifest = CompositionManifest(
        object_categories=ma.object_categories | mb.object_categories,
        instances={cat: tuple(sorted(ids)) for cat, ids in sorted(instances.items())},
        init_region=ma.init_region.bounds_union(mb.init_region),
        camera=ma.camera,
        texture_ids=ma.texture_ids | mb.texture_ids,
        dynamics=ma.dynamics,
        task_ids=ma.task_ids | mb.task_ids,
    )
    return Dataset(
        trajectories=list(a.trajectories) + list(b.trajectories),
        manifest=manifest,
        source=source,
        name=name or f"{a.name}+{b.name}",
        world_spec=a.world_spec if a.world_spec == b.world_spec else None,
    )
