"""Co-training loop: minibatches drawn from the mixture table, fixed-probe checkpoint losses."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Tuple

import numpy as np

from cotrain.config import DEFAULTS, default_seed
from cotrain.errors import ConfigError, TrainingDiverged
from cotrain.policy.checkpoint import Checkpoint
from cotrain.policy.network import PolicyParams, loss, loss_and_grad, observation_features
from cotrain.policy.optim import OPTIMIZERS, make_optimizer
from cotrain.rng import derive_seed, new_rng
from cotrain.sampler import MixtureSpec, ProbabilityTable, assign_weights

logger = logging.getLogger(__name__)

PROBE_SIZE = 512
STD_FLOOR = 1e-6
# input spreads below this are raised to it
OBS_STD_MIN = 0.02


@dataclass
class TrainConfig:
    steps: int = 20000
    batch_size: int = 64
    learning_rate: float = 1e-3
    optimizer: str = "adam"
    checkpoint_count: int = 3
    seed: int = default_seed
    hidden: Tuple[int, ...] = (128, 128)

    def __post_init__(self) -> None:
        if not (self.steps >= self.checkpoint_count >= 1):
            raise ConfigError(f"need steps >= checkpoint_count >= 1, got {self.steps}, {self.checkpoint_count}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if not (self.learning_rate > 0):
            raise ConfigError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.optimizer.lower() not in OPTIMIZERS:
            raise ConfigError(f"unknown optimizer {self.optimizer!r}")
        self.hidden = tuple(int(h) for h in self.hidden)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "steps": self.steps,
            "batch_size": self.batch_size,
            "learning_rate": self.learning_rate,
            "optimizer": self.optimizer,
            "checkpoint_count": self.checkpoint_count,
            "seed": self.seed,
            "hidden": list(self.hidden),
        }

    @classmethod
    def from_dict(cls, entry: Dict[str, Any]) -> "TrainConfig":
        base = cls()
        return cls(
            steps=int(entry.get("steps", base.steps)),
            batch_size=int(entry.get("batch_size", base.batch_size)),
            learning_rate=float(entry.get("learning_rate", base.learning_rate)),
            optimizer=str(entry.get("optimizer", base.optimizer)),
            checkpoint_count=int(entry.get("checkpoint_count", base.checkpoint_count)),
            seed=int(entry.get("seed", base.seed)),
            hidden=tuple(entry.get("hidden", base.hidden)),
        )


@dataclass
class TrainRun:
    checkpoints: List[Checkpoint]
    initial_loss: float
    # minibatch loss after every step
    trace: List[float] = field(default_factory=list)


def checkpoint_steps(steps: int, count: int) -> List[int]:
    """Equally spaced checkpoint steps, rounded up: ceil(k * steps / count)."""
    return [-(-k * steps // count) for k in range(1, count + 1)]


def mixture_arrays(mixture: MixtureSpec) -> Tuple[np.ndarray, np.ndarray]:
    """Feature and action matrices whose rows line up with the probability table."""
    feats: List[np.ndarray] = []
    acts: List[np.ndarray] = []
    for d in mixture.datasets:
        for traj in d.trajectories:
            feats.append(observation_features(traj.images, traj.proprio, DEFAULTS.image_grid))
            acts.append(np.asarray(traj.actions, dtype=np.float64))
    return np.concatenate(feats, axis=0), np.concatenate(acts, axis=0)


def _standardizer(values: np.ndarray, minimum: float = STD_FLOOR) -> Tuple[np.ndarray, np.ndarray]:
    mean = values.mean(axis=0)
    std = values.std(axis=0)
    std = np.where(std < STD_FLOOR, 1.0, np.maximum(std, minimum))
    return mean, std


def normalization_rows(table: ProbabilityTable) -> np.ndarray:
    """Rows the input and action statistics come from.

    The drawable real rows when there are any, so the policy is standardized in
    the deployment domain however large the sim pool; otherwise every drawable
    row. Zero-weight pools never contribute.
    """
    support = table.support
    real = support[table.pool[support] == 0]
    return real if real.size else support


def initial_params(X: np.ndarray, Y: np.ndarray, table: ProbabilityTable, config: TrainConfig) -> PolicyParams:
    dims = [X.shape[1], *config.hidden, Y.shape[1]]
    params = PolicyParams.init(dims, new_rng(derive_seed(config.seed, "init")))
    rows = normalization_rows(table)
    params.obs_mean, params.obs_std = _standardizer(X[rows], OBS_STD_MIN)
    params.action_offset, params.action_scale = _standardizer(Y[rows])
    return params


def train_run(mixture: MixtureSpec, config: TrainConfig) -> TrainRun:
    table = assign_weights(mixture)
    X, Y = mixture_arrays(mixture)
    params = initial_params(X, Y, table, config)
    optimizer = make_optimizer(config.optimizer, config.learning_rate)

    probe = table.draw_rows(PROBE_SIZE, new_rng(derive_seed(config.seed, "probe")))
    Xp, Yp = X[probe], Y[probe]
    initial = loss(params, Xp, Yp)

    batch_rng = new_rng(derive_seed(config.seed, "batches"))
    save_at = set(checkpoint_steps(config.steps, config.checkpoint_count))
    log_every = max(1, config.steps // 10)
    checkpoints: List[Checkpoint] = []
    trace: List[float] = []
    logger.info(
        "training %d steps, alpha=%.4f, %d drawable frames, dims %s",
        config.steps, mixture.alpha, len(table.support), params.dims,
    )
    for step_index in range(1, config.steps + 1):
        rows = table.draw_rows(config.batch_size, batch_rng)
        value, grads = loss_and_grad(params, X[rows], Y[rows])
        if not math.isfinite(value):
            raise TrainingDiverged(f"diverged: non-finite loss at step {step_index}")
        optimizer.step(params, grads)
        trace.append(value)
        if step_index in save_at:
            probe_loss = loss(params, Xp, Yp)
            if not math.isfinite(probe_loss) or not params.is_finite():
                raise TrainingDiverged(f"diverged: non-finite parameters at step {step_index}")
            checkpoints.append(Checkpoint(params=params.copy(), step=step_index, train_loss=probe_loss, seed=config.seed))
        if step_index % log_every == 0:
            logger.info("step %d/%d loss %.6f", step_index, config.steps, value)
    return TrainRun(checkpoints=checkpoints, initial_loss=initial, trace=trace)


def train(mixture: MixtureSpec, config: TrainConfig) -> List[Checkpoint]:
    return train_run(mixture, config).checkpoints
