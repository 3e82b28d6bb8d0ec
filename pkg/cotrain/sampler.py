"""Co-training mixture weighting as exact per-frame sampling probabilities.

A frame of real data is drawn with probability (1 - alpha) / |D_real| (the
real pool is one merged dataset) and a frame of sim dataset j with
alpha * w_j / |D_sim,j|, sizes counted in frames. Drawing batches from
this table gives each pool the same expected batch mass as weighting the
two pool losses by (1 - alpha) and alpha.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from cotrain.errors import DimensionMismatch, EmptyPool
from cotrain.trajectory.types import Dataset

logger = logging.getLogger(__name__)

WEIGHT_TOL = 1e-9


class Pool(str, Enum):
    REAL = "Real"
    SIM = "Sim"


@dataclass(frozen=True)
class SampleKey:
    """One drawn frame; dataset_index counts within `pool` (real_pool or sim_pool)."""

    pool: Pool
    dataset_index: int
    trajectory_index: int
    frame_index: int


@dataclass
class MixtureSpec:
    real_pool: List[Dataset]
    sim_pool: List[Dataset]
    alpha: float
    sim_subweights: Optional[List[float]] = None

    def __post_init__(self) -> None:
        if not (0.0 <= self.alpha <= 1.0):
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")
        if self.sim_subweights is None:
            n = len(self.sim_pool)
            self.sim_subweights = [1.0 / n] * n if n else []
        weights = [float(w) for w in self.sim_subweights]
        if len(weights) != len(self.sim_pool):
            raise ValueError(f"{len(weights)} sim_subweights for {len(self.sim_pool)} sim datasets")
        if any(w < 0 for w in weights):
            raise ValueError(f"sim_subweights must be nonnegative, got {weights}")
        if weights and abs(sum(weights) - 1.0) > WEIGHT_TOL:
            raise ValueError(f"sim_subweights must sum to 1, got {sum(weights)}")
        self.sim_subweights = weights
        dims = {(d.image_shape, d.proprio_dim, d.action_dim) for d in self.datasets if d.trajectories}
        if len(dims) > 1:
            raise DimensionMismatch(f"dimension mismatch across mixture datasets: {sorted(map(str, dims))}")

    @property
    def datasets(self) -> List[Dataset]:
        """Real datasets first, then sim; the row order of the probability table."""
        return list(self.real_pool) + list(self.sim_pool)

    def dataset_for(self, key: "SampleKey") -> Dataset:
        pool = self.sim_pool if key.pool == Pool.SIM else self.real_pool
        return pool[key.dataset_index]

    @classmethod
    def real_only(cls, real: Sequence[Dataset]) -> "MixtureSpec":
        return cls(real_pool=list(real), sim_pool=[], alpha=0.0)

    @classmethod
    def sim_only(cls, sim: Sequence[Dataset], sim_subweights: Optional[List[float]] = None) -> "MixtureSpec":
        return cls(real_pool=[], sim_pool=list(sim), alpha=1.0, sim_subweights=sim_subweights)


@dataclass
class ProbabilityTable:
    """One row per frame, real datasets first, then sim, each trajectory-major.

    dataset_index restarts at 0 in the sim rows: it indexes the row's own pool.
    """

    pool: np.ndarray  # 0 real, 1 sim
    dataset_index: np.ndarray
    trajectory_index: np.ndarray
    frame_index: np.ndarray
    probs: np.ndarray
    cdf: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        self.cdf = np.cumsum(self.probs)

    def __len__(self) -> int:
        return int(self.probs.shape[0])

    def key(self, row: int) -> SampleKey:
        return SampleKey(
            pool=Pool.SIM if self.pool[row] else Pool.REAL,
            dataset_index=int(self.dataset_index[row]),
            trajectory_index=int(self.trajectory_index[row]),
            frame_index=int(self.frame_index[row]),
        )

    def keys(self, rows: np.ndarray) -> List[SampleKey]:
        return [self.key(int(r)) for r in rows]

    def pool_mass(self, pool: Pool) -> float:
        mask = self.pool == (1 if pool == Pool.SIM else 0)
        return float(self.probs[mask].sum())

    @property
    def support(self) -> np.ndarray:
        """Rows that can be drawn."""
        return np.flatnonzero(self.probs > 0)

    def draw_rows(self, batch_size: int, rng: np.random.Generator) -> np.ndarray:
        u = rng.random(batch_size) * self.cdf[-1]
        rows = np.searchsorted(self.cdf, u, side="right")
        return np.minimum(rows, len(self) - 1)


def _frame_rows(datasets: Sequence[Dataset], pool_flag: int, first_index: int) -> Iterator[Tuple[np.ndarray, ...]]:
    for d_offset, d in enumerate(datasets):
        for t_index, traj in enumerate(d.trajectories):
            n = len(traj)
            yield (
                np.full(n, pool_flag, dtype=np.int8),
                np.full(n, first_index + d_offset, dtype=np.int64),
                np.full(n, t_index, dtype=np.int64),
                np.arange(n, dtype=np.int64),
            )


def assign_weights(spec: MixtureSpec) -> ProbabilityTable:
    alpha = spec.alpha
    real_frames = sum(d.frame_count for d in spec.real_pool)
    sim_frames = [d.frame_count for d in spec.sim_pool]

    if 0.0 < alpha < 1.0 and (real_frames == 0 or sum(sim_frames) == 0):
        raise EmptyPool(f"empty pool: alpha={alpha} needs both pools (real {real_frames}, sim {sum(sim_frames)} frames)")
    if alpha == 1.0 and sum(sim_frames) == 0:
        raise EmptyPool("empty pool: alpha=1 with no simulation frames")
    if alpha == 0.0 and real_frames == 0:
        raise EmptyPool("empty pool: alpha=0 with no real frames")
    if alpha > 0.0:
        for j, (w, n) in enumerate(zip(spec.sim_subweights or [], sim_frames)):
            if w > 0 and n == 0:
                raise EmptyPool(f"empty pool: sim dataset {j} has weight {w} but no frames")

    columns: List[Tuple[np.ndarray, ...]] = []
    probs: List[np.ndarray] = []
    real_p = (1.0 - alpha) / real_frames if real_frames else 0.0
    for cols in _frame_rows(spec.real_pool, 0, 0):
        columns.append(cols)
        probs.append(np.full(cols[0].shape[0], real_p, dtype=np.float64))
    for j, d in enumerate(spec.sim_pool):
        w = (spec.sim_subweights or [])[j]
        p = alpha * w / sim_frames[j] if sim_frames[j] else 0.0
        for cols in _frame_rows([d], 1, j):
            columns.append(cols)
            probs.append(np.full(cols[0].shape[0], p, dtype=np.float64))

    table = ProbabilityTable(
        pool=np.concatenate([c[0] for c in columns]),
        dataset_index=np.concatenate([c[1] for c in columns]),
        trajectory_index=np.concatenate([c[2] for c in columns]),
        frame_index=np.concatenate([c[3] for c in columns]),
        probs=np.concatenate(probs),
    )
    logger.debug(
        "mixture alpha=%.4f: %d real frames, sim frames %s, total mass %.15f",
        alpha, real_frames, sim_frames, float(table.cdf[-1]),
    )
    return table


def sample_batch(
    spec: Union[MixtureSpec, ProbabilityTable], batch_size: int, rng: np.random.Generator
) -> List[SampleKey]:
    """`batch_size` independent draws, with replacement."""
    table = spec if isinstance(spec, ProbabilityTable) else assign_weights(spec)
    return table.keys(table.draw_rows(batch_size, rng))


def effective_loss_weighting(spec: MixtureSpec) -> Tuple[float, float]:
    """(w_sim, w_real): expected per-batch mass on each pool, equal to the loss weights alpha and 1 - alpha."""
    return (float(spec.alpha), 1.0 - float(spec.alpha))
