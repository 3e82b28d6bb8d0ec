"""Experiment designs. Each planner turns a config into paired cells that share data and eval seeds."""
from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from cotrain.experiments.bank import DataBank
from cotrain.experiments.cells import Cell, cotrain_mixture, run_cells
from cotrain.experiments.config import ExperimentConfig, Protocol
from cotrain.experiments.results import ResultRow
from cotrain.geometry import Pose2
from cotrain.rng import derive_seed
from cotrain.sampler import MixtureSpec
from cotrain.trajectory.types import Dataset, SourceTag
from cotrain.world.objects import get_object_spec
from cotrain.world.spec import WorldConfig

logger = logging.getLogger(__name__)

REAL = "Real"
REAL_DC = "Real+DC"
REAL_PRIOR = "Real+Prior"
REAL_DC_PRIOR = "Real+DC+Prior"
REAL_ONLY = "real-only"
COTRAINED = "co-trained"
ALIGNED = "aligned"
MISALIGNED = "misaligned"


@dataclass(frozen=True)
class SeedPlan:
    """Seeds shared by every condition of one experiment seed."""

    seed: int
    real: int
    dc: int
    train: int
    eval: int

    @classmethod
    def of(cls, seed: int) -> "SeedPlan":
        return cls(
            seed=seed,
            real=derive_seed(seed, "real"),
            dc=derive_seed(seed, "dc"),
            train=derive_seed(seed, "train"),
            eval=derive_seed(seed, "eval"),
        )

    def prior(self, index: int) -> int:
        return derive_seed(self.seed, "prior", index)


def alpha_label(alpha: float) -> str:
    # shortest round-trip repr: distinct ratios never share a label
    return f"alpha={float(alpha)!r}"


def count_label(prefix: str, count: int) -> str:
    # zero-padded so lexical row order is numeric order
    return f"{prefix}@{count:05d}"


def _objects(ids: Sequence[str]) -> tuple:
    return tuple(get_object_spec(i) for i in ids)


class Planner:
    """Shared plumbing: seeds, the data bank and cell construction for one config."""

    def __init__(self, cfg: ExperimentConfig, bank: DataBank) -> None:
        self.cfg = cfg
        self.bank = bank

    def cell(
        self,
        plan: SeedPlan,
        mixture: MixtureSpec,
        evals: Sequence[Tuple[str, WorldConfig]],
    ) -> Cell:
        return Cell(
            protocol=self.cfg.protocol.value,
            seed=plan.seed,
            mixture=mixture,
            evals=tuple(evals),
            train=replace(self.cfg.train, seed=plan.train),
            eval_seed=plan.eval,
            eval_episodes=self.cfg.eval_episodes,
        )

    def real(self, plan: SeedPlan, world: Optional[WorldConfig] = None, count: Optional[int] = None) -> Dataset:
        return self.bank.demos(world or self.cfg.world_real, count or self.cfg.n_real_demos, plan.real)

    def dc(self, plan: SeedPlan, world: Optional[WorldConfig] = None, count: Optional[int] = None) -> Dataset:
        count = self.cfg.n_dc_demos if count is None else count
        return self.bank.generated(world or self.cfg.world_dc, count, plan.dc)

    def prior_pool(self, plan: SeedPlan) -> Dataset:
        priors = [
            self.bank.generated(w, self.cfg.n_prior_demos, plan.prior(i))
            for i, w in enumerate(self.cfg.worlds_prior)
        ]
        return self.bank.pooled(priors, SourceTag.PRIOR, "prior-pool")


def plan_mix_table(cfg: ExperimentConfig, bank: DataBank) -> List[Cell]:
    p = Planner(cfg, bank)
    cells = []
    for seed in cfg.seeds:
        plan = SeedPlan.of(seed)
        real, dc, prior = p.real(plan), p.dc(plan), p.prior_pool(plan)
        mixes = {
            REAL: MixtureSpec.real_only([real]),
            REAL_DC: cotrain_mixture(real, [dc], cfg.alpha),
            REAL_PRIOR: cotrain_mixture(real, [prior], cfg.alpha),
            REAL_DC_PRIOR: cotrain_mixture(real, [dc, prior], cfg.alpha),
        }
        cells += [p.cell(plan, mix, [(label, cfg.world_real)]) for label, mix in mixes.items()]
    return cells


def plan_ratio_sweep(cfg: ExperimentConfig, bank: DataBank) -> List[Cell]:
    p = Planner(cfg, bank)
    cells = []
    for seed in cfg.seeds:
        plan = SeedPlan.of(seed)
        real, dc = p.real(plan), p.dc(plan)
        for alpha in cfg.alpha_grid:
            cells.append(p.cell(plan, cotrain_mixture(real, [dc], alpha), [(alpha_label(alpha), cfg.world_real)]))
    return cells


def plan_real_scaling(cfg: ExperimentConfig, bank: DataBank) -> List[Cell]:
    p = Planner(cfg, bank)
    cells = []
    for seed in cfg.seeds:
        plan = SeedPlan.of(seed)
        dc = p.dc(plan)
        for count in cfg.real_count_grid:
            real = p.real(plan, count=count)
            cells.append(p.cell(plan, MixtureSpec.real_only([real]), [(count_label(REAL_ONLY, count), cfg.world_real)]))
            cells.append(p.cell(plan, cotrain_mixture(real, [dc], cfg.alpha), [(count_label(COTRAINED, count), cfg.world_real)]))
    return cells


def plan_sim_quantity(cfg: ExperimentConfig, bank: DataBank) -> List[Cell]:
    p = Planner(cfg, bank)
    cells = []
    largest = max(cfg.sim_count_grid)
    for seed in cfg.seeds:
        plan = SeedPlan.of(seed)
        real = p.real(plan)
        dc_all = p.dc(plan, count=largest)
        for count in cfg.sim_count_grid:
            mix = cotrain_mixture(real, [dc_all.head(count)], cfg.alpha)
            cells.append(p.cell(plan, mix, [(count_label("sim", count), cfg.world_real)]))
    return cells


def plan_camera_ablation(cfg: ExperimentConfig, bank: DataBank) -> List[Cell]:
    p = Planner(cfg, bank)
    aligned = cfg.world_dc.with_gap(camera_offset=Pose2.identity())
    misaligned = cfg.world_dc.with_gap(camera_offset=cfg.camera_misalignment)
    cells = []
    for seed in cfg.seeds:
        plan = SeedPlan.of(seed)
        real = p.real(plan)
        for label, world in ((ALIGNED, aligned), (MISALIGNED, misaligned)):
            cells.append(p.cell(plan, cotrain_mixture(real, [p.dc(plan, world)], cfg.alpha), [(label, cfg.world_real)]))
        if cfg.camera_baseline:
            cells.append(p.cell(plan, MixtureSpec.real_only([real]), [(REAL_ONLY, cfg.world_real)]))
    return cells


def plan_unseen_positions(cfg: ExperimentConfig, bank: DataBank) -> List[Cell]:
    """Real demos start in the border band, sim demos anywhere; scoring puts objects at the center."""
    p = Planner(cfg, bank)
    border = cfg.world_real.evolve(init_mode="border")
    center = cfg.world_real.evolve(init_mode="center")
    sim_world = cfg.world_dc.evolve(init_mode="uniform")
    cells = []
    for seed in cfg.seeds:
        plan = SeedPlan.of(seed)
        real, dc = p.real(plan, border), p.dc(plan, sim_world)
        for label, mix in ((REAL_ONLY, MixtureSpec.real_only([real])), (COTRAINED, cotrain_mixture(real, [dc], cfg.alpha))):
            evals = [(f"{label}@center", center)]
            if cfg.sanity_rows:
                evals.append((f"{label}@border", border))
            cells.append(p.cell(plan, mix, evals))
    return cells


def plan_unseen_objects(cfg: ExperimentConfig, bank: DataBank) -> List[Cell]:
    """Real demos see category set A, sim sees A plus held-out categories, scoring uses other instances of those."""
    p = Planner(cfg, bank)
    seen = cfg.world_real.evolve(object_set=_objects(cfg.seen_objects))
    unseen = cfg.world_real.evolve(object_set=_objects(cfg.unseen_objects))
    sim_world = cfg.world_dc.evolve(object_set=_objects(cfg.seen_objects + cfg.sim_extra_objects))
    cells = []
    for seed in cfg.seeds:
        plan = SeedPlan.of(seed)
        real, dc = p.real(plan, seen), p.dc(plan, sim_world)
        for label, mix in ((REAL_ONLY, MixtureSpec.real_only([real])), (COTRAINED, cotrain_mixture(real, [dc], cfg.alpha))):
            evals = [(f"{label}@unseen", unseen)]
            if cfg.sanity_rows:
                evals.append((f"{label}@seen", seen))
            cells.append(p.cell(plan, mix, evals))
    return cells


PlanFn = Callable[[ExperimentConfig, DataBank], List[Cell]]

PROTOCOLS: Dict[Protocol, PlanFn] = {
    Protocol.MIX_TABLE: plan_mix_table,
    Protocol.RATIO_SWEEP: plan_ratio_sweep,
    Protocol.REAL_SCALING: plan_real_scaling,
    Protocol.SIM_QUANTITY: plan_sim_quantity,
    Protocol.CAMERA_ABLATION: plan_camera_ablation,
    Protocol.UNSEEN_POSITIONS: plan_unseen_positions,
    Protocol.UNSEEN_OBJECTS: plan_unseen_objects,
}


def _run(planner: PlanFn, cfg: ExperimentConfig, bank: Optional[DataBank], threads: Optional[int]) -> List[ResultRow]:
    bank = bank or DataBank(cfg.cache_dir, n_sources=cfg.n_sim_sources, threads=threads or cfg.threads)
    cells = planner(cfg, bank)
    logger.info("%s: %d cells planned", cfg.name, len(cells))
    return run_cells(cells, threads or cfg.threads)


def run_mix_table(cfg: ExperimentConfig, bank: Optional[DataBank] = None, threads: Optional[int] = None) -> List[ResultRow]:
    return _run(plan_mix_table, cfg, bank, threads)


def run_ratio_sweep(cfg: ExperimentConfig, bank: Optional[DataBank] = None, threads: Optional[int] = None) -> List[ResultRow]:
    return _run(plan_ratio_sweep, cfg, bank, threads)


def run_real_scaling(cfg: ExperimentConfig, bank: Optional[DataBank] = None, threads: Optional[int] = None) -> List[ResultRow]:
    return _run(plan_real_scaling, cfg, bank, threads)


def run_sim_quantity(cfg: ExperimentConfig, bank: Optional[DataBank] = None, threads: Optional[int] = None) -> List[ResultRow]:
    return _run(plan_sim_quantity, cfg, bank, threads)


def run_camera_ablation(cfg: ExperimentConfig, bank: Optional[DataBank] = None, threads: Optional[int] = None) -> List[ResultRow]:
    return _run(plan_camera_ablation, cfg, bank, threads)


def run_unseen_positions(cfg: ExperimentConfig, bank: Optional[DataBank] = None, threads: Optional[int] = None) -> List[ResultRow]:
    return _run(plan_unseen_positions, cfg, bank, threads)


def run_unseen_objects(cfg: ExperimentConfig, bank: Optional[DataBank] = None, threads: Optional[int] = None) -> List[ResultRow]:
    return _run(plan_unseen_objects, cfg, bank, threads)


def run_protocol(cfg: ExperimentConfig, bank: Optional[DataBank] = None, threads: Optional[int] = None) -> List[ResultRow]:
    return _run(PROTOCOLS[cfg.protocol], cfg, bank, threads)
