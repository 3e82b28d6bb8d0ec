"""Datasets an experiment trains on, built on demand and cached by (world, kind, count, seed)."""
from __future__ import annotations

import hashlib
import json
import logging
import threading
from pathlib import Path
from typing import Dict, Optional, Tuple

from cotrain.errors import CorruptManifest
from cotrain.mimicgen.generate import generate
from cotrain.rng import derive_seed
from cotrain.trajectory.storage import MANIFEST_NAME, concat_datasets, load_dataset, save_dataset
from cotrain.trajectory.types import Dataset, SourceTag
from cotrain.world.collect import collect_demos, manifest_for
from cotrain.world.spec import WorldConfig

logger = logging.getLogger(__name__)

DEMOS = "demos"
GENERATED = "generated"

BankKey = Tuple[str, str, int, int]


def world_key(world: WorldConfig) -> str:
    text = json.dumps(world.to_dict(), sort_keys=True)
    return hashlib.sha1(text.encode("utf-8")).hexdigest()[:16]


def empty_dataset(world: WorldConfig, source: SourceTag, name: str) -> Dataset:
    return Dataset(
        trajectories=[],
        manifest=manifest_for(world, []),
        source=source,
        name=name,
        world_spec=world.to_dict(),
    )


class DataBank:
    """Expert demos and generated demos per world.

    Expert collection keeps the first n successes of a fixed attempt order, and
    generation keeps the first n successes of a fixed attempt order, so a
    smaller request is always a prefix of a larger one with the same seed.
    """

    def __init__(self, cache_dir: Optional[str | Path] = None, n_sources: int = 10, threads: Optional[int] = None) -> None:
        self.cache_dir = Path(cache_dir) if cache_dir else None
        self.n_sources = n_sources
        self.threads = threads
        self._memory: Dict[BankKey, Dataset] = {}
        self._lock = threading.Lock()

    def _path(self, key: BankKey) -> Optional[Path]:
        if self.cache_dir is None:
            return None
        wkey, kind, count, seed = key
        return self.cache_dir / f"{kind}-{wkey}-n{count}-s{seed}"

    def _lookup(self, key: BankKey) -> Optional[Dataset]:
        with self._lock:
            if key in self._memory:
                return self._memory[key]
        path = self._path(key)
        if path is not None and (path / MANIFEST_NAME).is_file():
            try:
                d = load_dataset(path)
            except CorruptManifest as exc:
                logger.warning("ignoring unreadable cache entry %s: %s", path, exc)
                return None
            logger.info("cache hit %s", path.name)
            with self._lock:
                self._memory[key] = d
            return d
        return None

    def _store(self, key: BankKey, d: Dataset) -> Dataset:
        path = self._path(key)
        if path is not None and d.trajectories:
            save_dataset(d, path)
        with self._lock:
            self._memory[key] = d
        return d

    def demos(self, world: WorldConfig, count: int, seed: int) -> Dataset:
        """`count` expert demos in `world`; count 0 gives an empty dataset."""
        if count == 0:
            return empty_dataset(world, world.source_tag, f"{world.name}-demos")
        key = (world_key(world), DEMOS, count, int(seed))
        found = self._lookup(key)
        if found is not None:
            return found
        return self._store(key, collect_demos(world, count, seed))

    def generated(self, world: WorldConfig, count: int, seed: int) -> Dataset:
        """`count` mimicgen demos in `world`, multiplied from expert sources collected there."""
        tag = world.source_tag if world.source_tag != SourceTag.REAL_PROXY else SourceTag.DIGITAL_COUSIN
        if count == 0:
            return empty_dataset(world, tag, f"{world.name}-generated")
        key = (world_key(world), GENERATED, count, int(seed))
        found = self._lookup(key)
        if found is not None:
            return found
        sources = self.demos(world, self.n_sources, derive_seed(seed, "sources"))
        data, report = generate(sources, world, count, derive_seed(seed, "generate"), tag=tag, threads=self.threads)
        logger.info(
            "%s: generated %d demos, success rate %.2f over %d attempts",
            world.name, len(data), report.generation_success_rate, report.attempts,
        )
        return self._store(key, data)

    def pooled(self, datasets: list, source: SourceTag, name: str) -> Dataset:
        """Merge several sim datasets into one pool entry."""
        nonempty = [d for d in datasets if d.trajectories]
        if not nonempty:
            return datasets[0]
        merged = nonempty[0]
        for d in nonempty[1:]:
            merged = concat_datasets(merged, d, source=source, name=name)
        return merged
