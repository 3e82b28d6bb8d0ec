import numpy as np
import pytest

from cotrain.errors import DimensionMismatch, EmptyPool
from cotrain.rng import new_rng
from cotrain.sampler import MixtureSpec, Pool, assign_weights, effective_loss_weighting, sample_batch
from cotrain.trajectory.storage import concat_datasets
from cotrain.trajectory.types import SourceTag

from tests.helpers import make_dataset


@pytest.fixture
def real():
    return make_dataset([3, 7], name="real")


@pytest.fixture
def sims():
    return [
        make_dataset([20], source=SourceTag.DIGITAL_COUSIN, name="dc"),
        make_dataset([10, 20], source=SourceTag.PRIOR, name="prior"),
    ]


def test_row_probabilities(real, sims):
    table = assign_weights(MixtureSpec([real], sims, alpha=0.5, sim_subweights=[0.25, 0.75]))
    assert len(table) == 10 + 20 + 30
    assert table.probs.sum() == pytest.approx(1.0, abs=1e-12)
    assert table.probs[0] == pytest.approx(0.5 / 10)
    assert table.probs[10] == pytest.approx(0.5 * 0.25 / 20)
    assert table.probs[-1] == pytest.approx(0.5 * 0.75 / 30)
    assert table.pool_mass(Pool.SIM) == pytest.approx(0.5)
    assert table.key(0).pool == Pool.REAL
    assert table.key(12).pool == Pool.SIM
    assert table.key(12).dataset_index == 0
    assert table.key(59).dataset_index == 1
    assert table.key(59).trajectory_index == 1


@pytest.mark.parametrize("alpha", [0.5, 0.9, 0.99])
def test_empirical_sim_fraction(real, sims, alpha):
    n = 100_000
    table = assign_weights(MixtureSpec([real], sims, alpha=alpha))
    rows = table.draw_rows(n, new_rng(2024))
    bound = 3 * np.sqrt(alpha * (1 - alpha) / n)
    fraction = float(table.pool[rows].mean())
    assert abs(fraction - alpha) <= bound


def test_batch_loss_matches_weighted_pool_losses(real, sims):
    alpha = 0.9
    table = assign_weights(MixtureSpec([real], [sims[0]], alpha=alpha))
    rng = new_rng(7)
    per_row = np.where(table.pool == 1, rng.normal(2.0, 0.5, len(table)), rng.normal(1.0, 0.3, len(table)))
    expected = alpha * per_row[table.pool == 1].mean() + (1 - alpha) * per_row[table.pool == 0].mean()
    draws = new_rng(8)
    batch_means = np.array([per_row[table.draw_rows(64, draws)].mean() for _ in range(10_000)])
    stderr = batch_means.std() / np.sqrt(len(batch_means))
    assert abs(batch_means.mean() - expected) <= 3 * stderr


def test_extreme_ratios_draw_one_pool(real, sims):
    rng = new_rng(1)
    assert all(k.pool == Pool.REAL for k in sample_batch(MixtureSpec([real], sims, alpha=0.0), 500, rng))
    assert all(k.pool == Pool.SIM for k in sample_batch(MixtureSpec([real], sims, alpha=1.0), 500, rng))


def test_zero_weight_dataset_never_drawn(real, sims):
    table = assign_weights(MixtureSpec([real], sims, alpha=0.5, sim_subweights=[1.0, 0.0]))
    rows = table.draw_rows(5000, new_rng(3))
    assert not np.any((table.pool[rows] == 1) & (table.dataset_index[rows] == 1))


def test_empty_pools(real, sims):
    empty_sim = make_dataset([], source=SourceTag.DIGITAL_COUSIN)
    with pytest.raises(EmptyPool):
        assign_weights(MixtureSpec([real], [], alpha=0.5))
    with pytest.raises(EmptyPool):
        assign_weights(MixtureSpec([], sims, alpha=0.5))
    with pytest.raises(EmptyPool):
        assign_weights(MixtureSpec([real], [empty_sim], alpha=1.0))
    with pytest.raises(EmptyPool):
        assign_weights(MixtureSpec([], sims, alpha=0.0))
    with pytest.raises(EmptyPool):
        assign_weights(MixtureSpec([real], [sims[0], empty_sim], alpha=0.5))


def test_mixture_validation(real, sims):
    with pytest.raises(ValueError):
        MixtureSpec([real], sims, alpha=1.5)
    with pytest.raises(ValueError):
        MixtureSpec([real], sims, alpha=0.5, sim_subweights=[0.5, 0.6])
    with pytest.raises(ValueError):
        MixtureSpec([real], sims, alpha=0.5, sim_subweights=[1.0])
    with pytest.raises(DimensionMismatch):
        MixtureSpec([real], [make_dataset([4], size=16)], alpha=0.5)


def test_effective_loss_weighting(real, sims):
    assert effective_loss_weighting(MixtureSpec([real], sims, alpha=0.99)) == pytest.approx((0.99, 0.01))
    assert effective_loss_weighting(MixtureSpec.real_only([real])) == (0.0, 1.0)


def test_draws_are_reproducible(real, sims):
    spec = MixtureSpec([real], sims, alpha=0.7)
    assert sample_batch(spec, 32, new_rng(5)) == sample_batch(spec, 32, new_rng(5))


@pytest.mark.parametrize("alpha", [0.0, 0.5, 1.0])
def test_keys_resolve_through_their_own_pool(real, sims, alpha):
    spec = MixtureSpec([real], sims, alpha=alpha)
    for key in sample_batch(spec, 2000, new_rng(11)):
        pool = spec.sim_pool if key.pool == Pool.SIM else spec.real_pool
        traj = pool[key.dataset_index].trajectories[key.trajectory_index]
        assert 0 <= key.frame_index < len(traj)
        assert spec.dataset_for(key) is pool[key.dataset_index]


def test_worked_example_probabilities():
    real20 = make_dataset([20])
    sim1000 = make_dataset([500, 500], source=SourceTag.DIGITAL_COUSIN)
    table = assign_weights(MixtureSpec([real20], [sim1000], alpha=0.99))
    assert table.probs[0] == pytest.approx(0.0005, abs=1e-15)
    assert table.probs[-1] == pytest.approx(0.00099, abs=1e-15)
    assert table.probs.sum() == pytest.approx(1.0, abs=1e-12)


def test_doubling_the_sim_pool_keeps_pool_mass(real, sims):
    dc = sims[0]
    doubled = concat_datasets(dc, dc)
    once = assign_weights(MixtureSpec([real], [dc], alpha=0.9))
    twice = assign_weights(MixtureSpec([real], [doubled], alpha=0.9))
    assert twice.pool_mass(Pool.SIM) == pytest.approx(once.pool_mass(Pool.SIM), abs=1e-12)
    assert twice.pool_mass(Pool.REAL) == pytest.approx(once.pool_mass(Pool.REAL), abs=1e-12)
    assert twice.probs[-1] == pytest.approx(once.probs[-1] / 2, abs=1e-15)
    assert np.array_equal(twice.probs[twice.pool == 0], once.probs[once.pool == 0])
