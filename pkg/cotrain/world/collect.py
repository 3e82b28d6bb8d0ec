from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Optional, Protocol

import numpy as np

from cotrain.config import DEFAULTS
from cotrain.errors import ExpertFailure
from cotrain.rng import derive_seed
from cotrain.trajectory.types import (
    Action,
    CompositionManifest,
    Dataset,
    GeneratorKind,
    ObjectRecord,
    ObservationFrame,
    Trajectory,
)
from cotrain.world.expert import ExpertController
from cotrain.world.render import render
from cotrain.world.sim import check_success, reset, step
from cotrain.world.spec import WorldConfig
from cotrain.world.state import State

logger = logging.getLogger(__name__)


class Controller(Protocol):
    name: str

    def begin(self, episode_seed: int) -> None: ...

    def act(self, state: State, obs: ObservationFrame) -> Action: ...

    def spawn(self) -> "Controller":
        """A fresh controller with the same settings, for parallel episodes."""
        ...


@dataclass
class Rollout:
    trajectory: Trajectory
    states: List[State]
    best_success: float
    final_success: float


def observe(state: State, config: WorldConfig) -> ObservationFrame:
    image = render(state, config.camera, config.gap, table=config.table, door_length=config.task.door_length)
    return ObservationFrame(image=image, proprio=state.proprio())


def episode_seed(config: WorldConfig, seed: int, index: int) -> int:
    if config.seed_policy == "sequential":
        return int(seed) + index
    return derive_seed(seed, "episode", index)


def object_records(state: State) -> tuple:
    return tuple(ObjectRecord(o.instance_id, o.category) for o in state.objects)


def rollout(
    config: WorldConfig,
    controller: Controller,
    ep_seed: int,
    horizon: Optional[int] = None,
    generator: GeneratorKind = GeneratorKind.HUMAN_PROXY,
) -> Rollout:
    """Run one closed-loop episode, stopping early on full success."""
    horizon = horizon or config.episode_horizon
    state = reset(config, ep_seed)
    controller.begin(ep_seed)
    dyn = config.dynamics()
    states = [state]
    images, proprio, actions = [], [], []
    best = 0.0
    success = 0.0
    for _ in range(horizon):
        obs = observe(state, config)
        action = controller.act(state, obs).clamped(dyn.action_low, dyn.action_high)
        images.append(obs.image)
        proprio.append(obs.proprio)
        actions.append(action.delta)
        state = step(state, action, config)
        states.append(state)
        success = check_success(state, config.task)
        best = max(best, success)
        if success == 1.0:
            break
    traj = Trajectory(
        images=np.stack(images),
        proprio=np.stack(proprio),
        actions=np.stack(actions),
        task_id=config.task.language_tag,
        success=success,
        source=config.source_tag,
        seed=int(ep_seed),
        generator=generator,
        objects=object_records(states[0]),
        palette_id=config.gap.palette_id,
    )
    return Rollout(trajectory=traj, states=states, best_success=best, final_success=success)


def manifest_for(config: WorldConfig, trajectories: List[Trajectory]) -> CompositionManifest:
    return CompositionManifest.from_records(
        trajectories,
        init_region=config.effective_init_region(),
        camera=config.effective_camera(),
        dynamics=config.dynamics(),
        task_ids=(config.task.language_tag,),
        texture_ids=(config.gap.palette_id,),
    )


def collect_demos(config: WorldConfig, n: int, seed: int, name: Optional[str] = None) -> Dataset:
    """Roll the scripted expert until `n` successful episodes are kept.

    The expert gets an attempt budget of collect_budget_factor * n episodes and
    fails once more than half of that budget has gone to failed episodes,
    i.e. when its success rate over the budget can no longer reach 50%.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    budget = DEFAULTS.collect_budget_factor * n
    controller = ExpertController(config.task)
    kept: List[Trajectory] = []
    failures = 0
    for i in range(budget):
        if len(kept) >= n or 2 * failures > budget:
            break
        result = rollout(config, controller, episode_seed(config, seed, i))
        if result.final_success == 1.0:
            kept.append(result.trajectory)
        else:
            failures += 1
            logger.debug("%s: episode %d failed (best %.1f)", config.name, i, result.best_success)
    attempts = len(kept) + failures
    if len(kept) < n or 2 * failures > budget:
        raise ExpertFailure(
            f"expert failure: {len(kept)} successes and {failures} failures against a budget of "
            f"{budget} attempts on {config.name!r}, needed {n} at a 50% success rate"
        )
    logger.info("%s: collected %d demos in %d attempts", config.name, n, attempts)
    return Dataset(
        trajectories=kept,
        manifest=manifest_for(config, kept),
        source=config.source_tag,
        name=name or f"{config.name}-demos",
        world_spec=config.to_dict(),
    )


def replay_episode(config: WorldConfig, traj: Trajectory) -> List[State]:
    """Re-derive the T+1 states of a stored trajectory from its seed and actions."""
    state = reset(config, traj.seed)
    states = [state]
    for delta in traj.actions:
        state = step(state, Action(delta=np.asarray(delta, dtype=np.float64)), config)
        states.append(state)
    return states
