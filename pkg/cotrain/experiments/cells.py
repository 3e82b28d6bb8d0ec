"""One (condition, seed) cell: train a mixture once, score every checkpoint in each eval world."""
from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from cotrain.config import thread_cap
from cotrain.errors import TrainingDiverged
from cotrain.experiments.results import ResultRow, sorted_rows
from cotrain.policy.evaluate import evaluate
from cotrain.policy.train import TrainConfig, train_run
from cotrain.sampler import MixtureSpec
from cotrain.trajectory.types import Dataset
from cotrain.world.spec import WorldConfig

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Cell:
    protocol: str
    seed: int
    mixture: MixtureSpec
    # (condition label, world the policy is scored in); one training run serves all of them
    evals: Tuple[Tuple[str, WorldConfig], ...]
    train: TrainConfig
    eval_seed: int
    eval_episodes: int

    @property
    def label(self) -> str:
        return f"{self.protocol}/{'+'.join(c for c, _ in self.evals)}/seed{self.seed}"


def cotrain_mixture(real: Dataset, sims: Sequence[Dataset], alpha: float) -> MixtureSpec:
    """Real plus the nonempty sim datasets at ratio alpha; no sim frames forces alpha to 0."""
    sims = [d for d in sims if d.frame_count > 0]
    if not sims or alpha == 0.0:
        return MixtureSpec.real_only([real])
    return MixtureSpec(real_pool=[real], sim_pool=sims, alpha=alpha)


def run_cell(cell: Cell, eval_threads: int = 1) -> List[ResultRow]:
    start = time.perf_counter()
    try:
        run = train_run(cell.mixture, cell.train)
    except TrainingDiverged as exc:
        logger.warning("%s: %s", cell.label, exc)
        elapsed = time.perf_counter() - start
        return [
            ResultRow(cell.protocol, condition, cell.seed, 0.0, -1, wallclock=elapsed, diverged=True, error=str(exc))
            for condition, _ in cell.evals
        ]

    rows: List[ResultRow] = []
    for condition, world in cell.evals:
        scores = [
            evaluate(ckpt.params, world, cell.eval_episodes, cell.eval_seed, threads=eval_threads)
            for ckpt in run.checkpoints
        ]
        best = int(np.argmax(scores))
        rows.append(
            ResultRow(
                protocol=cell.protocol,
                condition=condition,
                seed=cell.seed,
                score=float(scores[best]),
                checkpoint_used=run.checkpoints[best].step,
                wallclock=time.perf_counter() - start,
                checkpoint_scores=tuple(float(s) for s in scores),
            )
        )
        logger.info("%s %s seed %d: %.3f (checkpoint %d)", cell.protocol, condition, cell.seed, scores[best], run.checkpoints[best].step)
    return rows


def run_cells(cells: Sequence[Cell], threads: Optional[int] = None) -> List[ResultRow]:
    """Run independent cells, in parallel when allowed; rows come back in (protocol, condition, seed) order."""
    workers = threads or thread_cap()
    rows: List[ResultRow] = []
    if workers > 1 and len(cells) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for part in pool.map(run_cell, cells):
                rows.extend(part)
    else:
        for cell in cells:
            rows.extend(run_cell(cell))
    return sorted_rows(rows)
