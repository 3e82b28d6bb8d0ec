from dataclasses import replace

import pytest

from cotrain.errors import ConfigError
from cotrain.experiments.acceptance import check_results, inversions
from cotrain.experiments.bank import DataBank, world_key
from cotrain.experiments.config import EXPERIMENTS_DIR, ExperimentConfig, load_experiment
from cotrain.experiments.protocols import PROTOCOLS, alpha_label, count_label
from cotrain.experiments.results import RESULTS_CSV, ResultRow, emit_results, read_results, summarize_rows
from cotrain.experiments.runner import report, run_experiment
from cotrain.main import main
from cotrain.trajectory.types import SourceTag

from tests.helpers import make_dataset


class StubBank(DataBank):
    """Synthetic datasets with the requested trajectory counts; remembers the worlds asked for."""

    def __init__(self):
        super().__init__()
        self.requests = []

    def demos(self, world, count, seed):
        self.requests.append(("demos", world, count, seed))
        return make_dataset([4] * count, source=SourceTag.REAL_PROXY, name=f"{world.name}-demos")

    def generated(self, world, count, seed):
        self.requests.append(("generated", world, count, seed))
        tag = SourceTag.PRIOR if world.source_tag == SourceTag.PRIOR else SourceTag.DIGITAL_COUSIN
        return make_dataset([4] * count, source=tag, name=f"{world.name}-generated")


def _config(protocol, **overrides):
    entry = {
        "name": "test",
        "protocol": protocol,
        "world_real": "real_cup_pnp",
        "world_dc": "dc_cup_pnp",
        "worlds_prior": ["prior_can_shelf", "prior_bottle_bin"],
        "n_real_demos": 3,
        "n_dc_demos": 5,
        "n_prior_demos": 2,
        "seeds": [0, 1],
    }
    entry.update(overrides)
    return ExperimentConfig.from_dict(entry)


def _plan(cfg):
    bank = StubBank()
    return PROTOCOLS[cfg.protocol](cfg, bank), bank


def _conditions(cells):
    return sorted({label for cell in cells for label, _ in cell.evals})


@pytest.mark.parametrize("path", sorted(EXPERIMENTS_DIR.glob("*.yaml")), ids=lambda p: p.stem)
def test_shipped_configs_load(path):
    cfg = load_experiment(path)
    assert cfg.name == path.stem
    assert load_experiment(path.stem).to_dict() == cfg.to_dict()


def test_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        _config("Nonsense")
    with pytest.raises(ConfigError):
        _config("MixTable", worlds_prior=[])
    with pytest.raises(ConfigError):
        _config("RatioSweep", alpha_grid=[])
    with pytest.raises(ConfigError):
        _config("MixTable", alpha=1.2)
    with pytest.raises(ConfigError):
        _config("UnseenObjects", unseen_objects=["cup_red"], seen_objects=["cup_red"])
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"protocol": "MixTable", "world_real": "real_cup_pnp"})
    with pytest.raises(ConfigError):
        load_experiment(tmp_path / "missing.yaml")


def test_mix_table_plan():
    cells, bank = _plan(_config("MixTable"))
    assert len(cells) == 8
    assert _conditions(cells) == ["Real", "Real+DC", "Real+DC+Prior", "Real+Prior"]
    by_label = {(c.evals[0][0], c.seed): c for c in cells}
    assert by_label[("Real", 0)].mixture.alpha == 0.0
    full = by_label[("Real+DC+Prior", 1)].mixture
    assert len(full.sim_pool) == 2
    assert full.sim_subweights == [0.5, 0.5]
    # two prior worlds pooled into one sim dataset
    assert len(full.sim_pool[1]) == 4
    assert by_label[("Real", 0)].train.seed == by_label[("Real+DC", 0)].train.seed
    assert by_label[("Real", 0)].train.seed != by_label[("Real", 1)].train.seed


def test_conditions_share_data_within_a_seed():
    cells, _ = _plan(_config("MixTable", seeds=[0]))
    reals = {id(c.mixture.real_pool[0]) for c in cells}
    assert len(reals) == 1
    assert len({c.eval_seed for c in cells}) == 1


def test_ratio_sweep_plan():
    cfg = _config("RatioSweep", alpha_grid=[0.0, 0.5, 0.99])
    cells, _ = _plan(cfg)
    assert len(cells) == 6
    assert _conditions(cells) == [alpha_label(a) for a in (0.0, 0.5, 0.99)]
    zero = next(c for c in cells if c.evals[0][0] == alpha_label(0.0))
    assert zero.mixture.sim_pool == []


def test_close_ratios_get_distinct_labels():
    grid = [0.999, 0.9991, 0.9994, 0.99949, 1.0]
    assert len({alpha_label(a) for a in grid}) == len(grid)
    assert alpha_label(0.99) == "alpha=0.99"
    cells, _ = _plan(_config("RatioSweep", alpha_grid=[0.999, 0.9994], seeds=[0]))
    assert len(_conditions(cells)) == 2


def test_real_scaling_plan():
    cells, _ = _plan(_config("RealScaling", real_count_grid=[2, 6], seeds=[0]))
    assert len(cells) == 4
    sizes = {c.evals[0][0]: len(c.mixture.real_pool[0]) for c in cells}
    assert sizes == {count_label("real-only", 2): 2, count_label("co-trained", 2): 2,
                     count_label("real-only", 6): 6, count_label("co-trained", 6): 6}


def test_sim_quantity_uses_prefixes_of_one_generation():
    cells, bank = _plan(_config("SimQuantity", sim_count_grid=[1, 3], seeds=[0]))
    assert [len(c.mixture.sim_pool[0]) for c in cells] == [1, 3]
    generated = [r for r in bank.requests if r[0] == "generated"]
    assert [r[2] for r in generated] == [3]


def test_camera_ablation_plan():
    cells, bank = _plan(_config("CameraAblation", camera_baseline=True, camera_misalignment=[0.1, 0.0, 0.2], seeds=[0]))
    assert _conditions(cells) == ["aligned", "misaligned", "real-only"]
    offsets = sorted(tuple(r[1].gap.camera_offset.to_list()) for r in bank.requests if r[0] == "generated")
    assert offsets == [(0.0, 0.0, 0.0), (0.1, 0.0, 0.2)]
    for cell in cells:
        assert cell.evals[0][1].name == "real_cup_pnp"


def test_unseen_positions_plan():
    cells, bank = _plan(_config("UnseenPositions", sanity_rows=True, seeds=[0]))
    assert len(cells) == 2
    assert _conditions(cells) == ["co-trained@border", "co-trained@center", "real-only@border", "real-only@center"]
    modes = {label: world.init_mode for cell in cells for label, world in cell.evals}
    assert modes["real-only@center"] == "center"
    real_worlds = [r[1] for r in bank.requests if r[0] == "demos"]
    assert all(w.init_mode == "border" for w in real_worlds)


def test_unseen_objects_plan():
    cells, bank = _plan(_config("UnseenObjects", seeds=[0]))
    evaluated = {label: world for cell in cells for label, world in cell.evals}
    assert sorted(evaluated) == ["co-trained@unseen", "real-only@unseen"]
    unseen_ids = {o.id for o in evaluated["real-only@unseen"].object_set}
    assert unseen_ids == {"lemon_b", "cucumber_b"}
    sim_world = next(r[1] for r in bank.requests if r[0] == "generated")
    assert {o.id for o in sim_world.object_set} == {"cup_red", "cup_white", "lemon_a", "cucumber_a"}


def test_world_key_tracks_gap():
    cfg = _config("MixTable")
    assert world_key(cfg.world_dc) == world_key(cfg.world_dc.evolve())
    assert world_key(cfg.world_dc) != world_key(cfg.world_real)


def _rows():
    rows = []
    for seed, (real, dc, prior, both) in enumerate([(0.2, 0.5, 0.3, 0.6), (0.3, 0.45, 0.2, 0.5)]):
        for label, score in (("Real", real), ("Real+DC", dc), ("Real+Prior", prior), ("Real+DC+Prior", both)):
            rows.append(ResultRow("MixTable", label, seed, score, 13334, wallclock=1.5, checkpoint_scores=(0.1, score, 0.0)))
    return rows


def test_results_round_trip(tmp_path):
    written = emit_results(_rows(), tmp_path)
    back = read_results(tmp_path)
    assert [(r.condition, r.seed, r.score, r.checkpoint_scores) for r in back] == [
        (r.condition, r.seed, r.score, r.checkpoint_scores) for r in sorted(_rows(), key=lambda r: r.sort_key)
    ]
    first = written[RESULTS_CSV].read_bytes()
    emit_results(list(reversed(back)), tmp_path)
    assert (tmp_path / RESULTS_CSV).read_bytes() == first
    assert "1.5" not in first.decode("utf-8")


def test_summary_statistics():
    summary = summarize_rows(_rows())["MixTable"]
    assert summary["Real+DC"]["mean"] == pytest.approx(0.475)
    assert summary["Real+DC"]["std"] == pytest.approx(0.025)
    assert summary["Real"]["seeds"] == [0, 1]


def test_score_range():
    with pytest.raises(ValueError):
        ResultRow("MixTable", "Real", 0, 1.5, 1)


def test_acceptance_checks():
    checks = {c.name: c.passed for c in check_results(_rows())}
    assert checks["Real+DC beats Real"] is True
    assert checks["Real+DC+Prior not below Real"] is True
    assert checks["no diverged cells"] is True
    strict = {c.name: c.passed for c in check_results(_rows(), {"cotrain_margin": 0.5})}
    assert strict["Real+DC beats Real"] is False


def test_acceptance_flags_divergence_and_missing_rows():
    rows = [ResultRow("RatioSweep", alpha_label(0.5), 0, 0.0, -1, diverged=True)]
    checks = check_results(rows)
    assert not any(c.passed for c in checks)


def test_inversions():
    assert inversions([0.1, 0.2, 0.3]) == 0
    assert inversions([0.3, 0.2, 0.25, 0.1]) == 2


def test_report_reads_results(tmp_path):
    emit_results(_rows(), tmp_path)
    assert all(c.passed for c in report(tmp_path))
    assert main(["exp", "report", "--dir", str(tmp_path)]) == 0


def test_cli_exit_codes(tmp_path):
    assert main(["exp", "report", "--dir", str(tmp_path / "none")]) == 2
    assert main(["exp", "run", "--config", str(tmp_path / "missing.yaml"), "--out", str(tmp_path)]) == 2
    assert main(["toyworld", "collect", "--world", "no_such_world", "--n", "1", "--out", str(tmp_path / "d")]) == 2
    emit_results([ResultRow("MixTable", "Real", 0, 0.0, -1, diverged=True)], tmp_path / "bad")
    assert main(["exp", "report", "--dir", str(tmp_path / "bad")]) == 1


def test_cli_collect_and_stats(tmp_path, capsys):
    out = tmp_path / "demos"
    assert main(["toyworld", "collect", "--world", "real_cup_pnp", "--n", "1", "--seed", "3", "--out", str(out)]) == 0
    assert main(["compose", "stats", "--dir", str(out)]) == 0
    assert '"trajectories": 1' in capsys.readouterr().out


@pytest.mark.slow
def test_smoke_experiment_is_reproducible(tmp_path):
    cfg = load_experiment("smoke")
    cfg = replace(cfg, cache_dir=None)
    first = run_experiment(cfg, tmp_path / "a", threads=1)
    assert first.exit_code == 0
    assert sorted({r.condition for r in first.rows}) == ["Real", "Real+DC", "Real+DC+Prior", "Real+Prior"]
    second = run_experiment(cfg, tmp_path / "b", threads=2)
    assert (tmp_path / "a" / RESULTS_CSV).read_bytes() == (tmp_path / "b" / RESULTS_CSV).read_bytes()


@pytest.mark.slow
def test_digital_cousin_data_helps_the_real_task():
    from cotrain.mimicgen.generate import generate
    from cotrain.policy.evaluate import evaluate
    from cotrain.policy.train import TrainConfig, train
    from cotrain.sampler import MixtureSpec
    from cotrain.world.collect import collect_demos
    from cotrain.world.presets import get_preset

    real_world, dc_world = get_preset("real_cup_pnp"), get_preset("dc_cup_pnp")
    real = collect_demos(real_world, 10, seed=101)
    dc, _ = generate(collect_demos(dc_world, 10, seed=202), dc_world, 200, seed=303, threads=1)
    config = TrainConfig(steps=4000, batch_size=64, learning_rate=1e-3, checkpoint_count=3, seed=404)

    def score(mixture):
        checkpoints = train(mixture, config)
        return sum(evaluate(c.params, real_world, 40, seed=505, threads=1) for c in checkpoints) / len(checkpoints)

    real_only = score(MixtureSpec.real_only([real]))
    cotrained = score(MixtureSpec([real], [dc], alpha=0.9))
    assert cotrained > real_only
