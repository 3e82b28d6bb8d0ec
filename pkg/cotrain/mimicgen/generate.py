"""Source-demo multiplication: retarget segments to new scenes, replay, keep successes."""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from cotrain.config import DEFAULTS, thread_cap
from cotrain.errors import OutOfWorkspace, UnsegmentableDemo
from cotrain.geometry import Pose2
from cotrain.mimicgen.segment import TARGET_REGION_ID, Segment, segment_source
from cotrain.mimicgen.transform import connect, segment_actions, transform_segment, trim_approach
from cotrain.rng import derive_seed, new_rng
from cotrain.trajectory.types import Action, Dataset, GeneratorKind, SourceTag, Trajectory
from cotrain.world.collect import manifest_for, object_records, observe, replay_episode
from cotrain.world.sim import check_success, reset, step
from cotrain.world.spec import WorldConfig
from cotrain.world.state import DOOR_ID, State

logger = logging.getLogger(__name__)

OUTCOME_SUCCESS = "success"
OUTCOME_OUT_OF_WORKSPACE = "out_of_workspace"
OUTCOME_FAILED_REPLAY = "failed_replay"


@dataclass
class GenerationReport:
    attempts: int = 0
    successes: int = 0
    out_of_workspace: int = 0
    failed_replays: int = 0
    per_attempt_seeds: List[int] = field(default_factory=list)
    source_indices: List[int] = field(default_factory=list)
    budget_exhausted: bool = False

    @property
    def generation_success_rate(self) -> float:
        return self.successes / self.attempts if self.attempts else 0.0

    @property
    def discards(self) -> int:
        return self.out_of_workspace + self.failed_replays

    def record(self, seed: int, source_index: int, outcome: str) -> None:
        self.attempts += 1
        self.per_attempt_seeds.append(int(seed))
        self.source_indices.append(int(source_index))
        if outcome == OUTCOME_SUCCESS:
            self.successes += 1
        elif outcome == OUTCOME_OUT_OF_WORKSPACE:
            self.out_of_workspace += 1
        else:
            self.failed_replays += 1

    def to_dict(self) -> Dict[str, Any]:
        return {
            "attempts": self.attempts,
            "successes": self.successes,
            "generation_success_rate": self.generation_success_rate,
            "out_of_workspace": self.out_of_workspace,
            "failed_replays": self.failed_replays,
            "budget_exhausted": self.budget_exhausted,
            "per_attempt_seeds": list(self.per_attempt_seeds),
            "source_indices": list(self.source_indices),
        }


def reference_pose(state: State, config: WorldConfig, reference_object: str) -> Pose2:
    """Where a segment's reference object sits in a freshly reset scene."""
    if reference_object == TARGET_REGION_ID:
        return Pose2(*config.task.target_region.center)  # type: ignore[union-attr]
    if reference_object == DOOR_ID:
        return state.door.pose  # type: ignore[union-attr]
    return state.object(reference_object).pose


def plan_actions(
    segments: Sequence[Segment],
    start: State,
    config: WorldConfig,
    max_step: float = DEFAULTS.connect_max_step,
    approach_radius: Optional[float] = DEFAULTS.approach_radius,
) -> np.ndarray:
    """Transform every segment to the scene in `start`, then stitch them into one action sequence.

    With `approach_radius` set, grasp and release segments lose their free-space
    lead-in and the bridge heads straight for the object-relative part; None
    keeps every source frame.
    Raises OutOfWorkspace before any action is produced if a transformed segment leaves the table.
    """
    if approach_radius is not None:
        segments = [trim_approach(seg, approach_radius) for seg in segments]
    moved = [transform_segment(seg, reference_pose(start, config, seg.reference_object), config.table) for seg in segments]
    pieces: List[np.ndarray] = []
    cursor = start.ee_pose
    gripper = 1.0 if start.gripper_open else 0.0
    for seg in moved:
        bridge = connect(cursor, seg.ee_path[0], max_step, gripper=gripper)
        if bridge:
            pieces.append(np.stack([a.delta for a in bridge]))
        pieces.append(segment_actions(seg))
        cursor = seg.ee_path[-1]
        gripper = seg.gripper[-1]
    return np.concatenate(pieces, axis=0)


def execute_plan(
    config: WorldConfig,
    ep_seed: int,
    actions: np.ndarray,
    source: SourceTag,
) -> Tuple[Trajectory, List[State]]:
    """Open-loop replay of `actions` from reset(config, ep_seed).

    Stops at full success or after config.episode_horizon actions, whichever comes first.
    """
    dyn = config.dynamics()
    state = reset(config, ep_seed)
    states = [state]
    images, proprio, executed = [], [], []
    success = 0.0
    for delta in actions[: config.episode_horizon]:
        action = Action(np.clip(delta, dyn.action_low, dyn.action_high))
        obs = observe(state, config)
        images.append(obs.image)
        proprio.append(obs.proprio)
        executed.append(action.delta)
        state = step(state, action, config)
        states.append(state)
        success = check_success(state, config.task)
        if success == 1.0:
            break
    traj = Trajectory(
        images=np.stack(images),
        proprio=np.stack(proprio),
        actions=np.stack(executed),
        task_id=config.task.language_tag,
        success=success,
        source=source,
        seed=int(ep_seed),
        generator=GeneratorKind.MIMICGEN_LITE,
        objects=object_records(states[0]),
        palette_id=config.gap.palette_id,
    )
    return traj, states


def source_world(sources: Dataset, fallback: WorldConfig) -> WorldConfig:
    if sources.world_spec:
        return WorldConfig.from_dict(sources.world_spec)
    return fallback


def segment_sources(sources: Dataset, world: WorldConfig) -> List[List[Segment]]:
    out: List[List[Segment]] = []
    for i, traj in enumerate(sources.trajectories):
        try:
            out.append(segment_source(traj, replay_episode(world, traj), world.task))
        except UnsegmentableDemo as exc:
            logger.warning("source %d skipped: %s", i, exc)
    if not out:
        raise UnsegmentableDemo(f"unsegmentable demo: no usable source in {sources.name!r}")
    return out


def _attempt(
    index: int,
    seed: int,
    library: List[List[Segment]],
    config: WorldConfig,
    tag: SourceTag,
    max_step: float,
) -> Tuple[int, int, str, Optional[Trajectory]]:
    attempt_seed = derive_seed(seed, "attempt", index)
    pick = int(new_rng(derive_seed(attempt_seed, "select")).integers(len(library)))
    start = reset(config, attempt_seed)
    try:
        plan = plan_actions(library[pick], start, config, max_step)
    except OutOfWorkspace as exc:
        logger.debug("attempt %d discarded: %s", index, exc)
        return attempt_seed, pick, OUTCOME_OUT_OF_WORKSPACE, None
    traj, _ = execute_plan(config, attempt_seed, plan, tag)
    if traj.success == 1.0:
        return attempt_seed, pick, OUTCOME_SUCCESS, traj
    return attempt_seed, pick, OUTCOME_FAILED_REPLAY, None


def generate(
    sources: Dataset,
    config: WorldConfig,
    n_target: int,
    seed: int,
    tag: Optional[SourceTag] = None,
    max_step: float = DEFAULTS.connect_max_step,
    threads: Optional[int] = None,
    name: Optional[str] = None,
) -> Tuple[Dataset, GenerationReport]:
    """Generate up to n_target successful demos in `config` from the source dataset.

    Attempts run in index order (optionally in parallel chunks); the result
    only depends on `seed`, never on the thread count.
    """
    if n_target < 1:
        raise ValueError(f"n_target must be >= 1, got {n_target}")
    if not sources.trajectories:
        raise ValueError("generate needs a nonempty source dataset")
    if tag is None:
        tag = config.source_tag if config.source_tag != SourceTag.REAL_PROXY else SourceTag.DIGITAL_COUSIN

    library = segment_sources(sources, source_world(sources, config))
    budget = DEFAULTS.generation_budget_factor * n_target
    workers = threads or thread_cap()
    chunk = max(1, workers) * 4
    report = GenerationReport()
    kept: List[Trajectory] = []

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        index = 0
        while index < budget and len(kept) < n_target:
            batch = range(index, min(budget, index + chunk))
            if workers > 1:
                results = list(pool.map(lambda i: _attempt(i, seed, library, config, tag, max_step), batch))
            else:
                results = [_attempt(i, seed, library, config, tag, max_step) for i in batch]
            for attempt_seed, pick, outcome, traj in results:
                report.record(attempt_seed, pick, outcome)
                if traj is not None:
                    kept.append(traj)
                if len(kept) >= n_target:
                    break
            index = batch.stop
            logger.info("%s: %d/%d generated after %d attempts", config.name, len(kept), n_target, report.attempts)

    if len(kept) < n_target:
        report.budget_exhausted = True
        logger.warning(
            "%s: attempt budget %d exhausted with %d/%d successes", config.name, budget, len(kept), n_target
        )
    dataset = Dataset(
        trajectories=kept,
        manifest=manifest_for(config, kept),
        source=tag,
        name=name or f"{config.name}-generated",
        world_spec=config.to_dict(),
    )
    return dataset, report
