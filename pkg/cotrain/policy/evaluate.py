from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Union

import numpy as np

from cotrain.config import thread_cap
from cotrain.rng import derive_seed
from cotrain.trajectory.types import Action, ObservationFrame
from cotrain.policy.network import PolicyParams, forward
from cotrain.world.collect import Controller, rollout
from cotrain.world.spec import WorldConfig
from cotrain.world.state import State

logger = logging.getLogger(__name__)


class MLPController:
    name = "mlp"

    def __init__(self, params: PolicyParams) -> None:
        self.params = params

    def begin(self, episode_seed: int) -> None:
        pass

    def act(self, state: State, obs: ObservationFrame) -> Action:
        return forward(self.params, obs)

    def spawn(self) -> "MLPController":
        return MLPController(self.params)


def as_controller(policy: Union[PolicyParams, Controller]) -> Controller:
    if isinstance(policy, PolicyParams):
        return MLPController(policy)
    return policy


def evaluate_episodes(
    policy: Union[PolicyParams, Controller],
    config: WorldConfig,
    n_episodes: int,
    seed: int,
    threads: Optional[int] = None,
) -> List[float]:
    """Per-episode scores: the best success level reached within the horizon."""
    if n_episodes < 1:
        raise ValueError(f"n_episodes must be >= 1, got {n_episodes}")
    prototype = as_controller(policy)

    def run(i: int) -> float:
        controller = prototype.spawn()  # type: ignore[attr-defined]
        return rollout(config, controller, derive_seed(seed, "eval", i)).best_success

    workers = threads or thread_cap()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(run, range(n_episodes)))
    return [run(i) for i in range(n_episodes)]


def evaluate(
    policy: Union[PolicyParams, Controller],
    config: WorldConfig,
    n_episodes: int,
    seed: int,
    threads: Optional[int] = None,
) -> float:
    scores = evaluate_episodes(policy, config, n_episodes, seed, threads)
    mean = float(np.mean(scores))
    logger.info("%s: mean success %.3f over %d episodes", config.name, mean, n_episodes)
    return mean
