import numpy as np
import pytest

from cotrain.errors import ConfigError, CorruptCheckpoint, DimensionMismatch, TrainingDiverged
from cotrain.policy.checkpoint import Checkpoint, load_checkpoint, read_header, save_checkpoint
from cotrain.policy.evaluate import evaluate, evaluate_episodes
from cotrain.policy.network import PolicyParams, forward, grad, loss, predict
from cotrain.policy.optim import make_optimizer
from cotrain.policy.train import TrainConfig, checkpoint_steps, initial_params, mixture_arrays, train, train_run
from cotrain.rng import new_rng
from cotrain.sampler import MixtureSpec, assign_weights
from cotrain.trajectory.storage import concat_datasets
from cotrain.trajectory.types import ObservationFrame, SourceTag
from cotrain.world.expert import ExpertController

from tests.helpers import make_dataset


def _random_params(dims, seed=0):
    rng = new_rng(seed)
    params = PolicyParams.init(dims, rng)
    params.obs_mean = rng.normal(0.0, 0.5, dims[0])
    params.obs_std = rng.uniform(0.5, 2.0, dims[0])
    params.action_offset = rng.normal(0.0, 0.1, dims[-1])
    params.action_scale = rng.uniform(0.5, 2.0, dims[-1])
    return params


def test_gradient_matches_finite_differences():
    dims = [10, 16, 4]
    params = _random_params(dims)
    rng = new_rng(1)
    X = rng.normal(size=(8, 10))
    Y = rng.normal(size=(8, 4))
    analytic = [g for pair in grad(params, X, Y) for g in pair]
    arrays = params.arrays()
    eps = 1e-5
    for _ in range(120):
        k = int(rng.integers(len(arrays)))
        idx = tuple(int(rng.integers(n)) for n in arrays[k].shape)
        saved = arrays[k][idx]
        arrays[k][idx] = saved + eps
        up = loss(params, X, Y)
        arrays[k][idx] = saved - eps
        down = loss(params, X, Y)
        arrays[k][idx] = saved
        numeric = (up - down) / (2 * eps)
        a = analytic[k][idx]
        assert abs(a - numeric) / max(abs(a) + abs(numeric), 1e-6) < 1e-4


def test_loss_of_constant_residual():
    params = PolicyParams.zeros([3, 4])
    X = np.ones((5, 3))
    assert loss(params, X, np.zeros((5, 4))) == 0.0
    assert loss(params, X, np.full((5, 4), 0.3)) == pytest.approx(0.09)


def test_gradient_vanishes_where_the_loss_does():
    params = _random_params([10, 16, 4], seed=3)
    X = new_rng(4).normal(size=(8, 10))
    Y = predict(params, X)
    assert loss(params, X, Y) == pytest.approx(0.0, abs=1e-24)
    for gW, gb in grad(params, X, Y):
        assert np.allclose(gW, 0.0, atol=1e-12)
        assert np.allclose(gb, 0.0, atol=1e-12)


def test_flipping_targets_flips_the_output_bias_gradient():
    params = PolicyParams.zeros([5, 3, 4])
    rng = new_rng(6)
    X = rng.normal(size=(7, 5))
    Y = rng.normal(size=(7, 4))
    up = grad(params, X, Y)[-1][1]
    down = grad(params, X, -Y)[-1][1]
    assert np.all(up != 0.0)
    assert np.array_equal(down, -up)


def test_identity_layer_by_hand():
    params = PolicyParams(
        layers=[(np.eye(4), np.array([0.0, 0.5, 0.0, -1.0]))],
        obs_mean=np.ones(4),
        obs_std=np.full(4, 2.0),
        action_offset=np.array([1.0, 0.0, 0.0, 0.0]),
        action_scale=np.array([1.0, 2.0, 0.5, 0.1]),
    )
    # standardized input [0.5, 1, 2, 4], plus bias [0.5, 1.5, 2, 3], then rescaled
    assert predict(params, np.array([[2.0, 3.0, 5.0, 9.0]]))[0] == pytest.approx([1.5, 3.0, 1.0, 0.3])


def test_predict_checks_dims():
    params = PolicyParams.zeros([3, 4])
    with pytest.raises(DimensionMismatch):
        predict(params, np.zeros((2, 5)))


def test_forward_clamps_and_sanitizes():
    params = PolicyParams.zeros([68, 4])
    params.layers[0][1][:] = [10.0, -10.0, np.nan, 5.0]
    obs = ObservationFrame(image=np.zeros((32, 32, 3), dtype=np.uint8), proprio=np.zeros(4))
    action = forward(params, obs)
    assert action.delta.tolist() == [0.05, -0.05, 0.0, 1.0]


def test_checkpoint_steps():
    assert checkpoint_steps(20000, 3) == [6667, 13334, 20000]
    assert checkpoint_steps(10, 3) == [4, 7, 10]
    assert checkpoint_steps(3, 3) == [1, 2, 3]


def test_checkpoint_file_round_trip(tmp_path):
    params = _random_params([68, 8, 4])
    path = save_checkpoint(Checkpoint(params, step=12, train_loss=0.5, seed=3), tmp_path / "a.ckpt")
    assert read_header(path)["dims"] == [68, 8, 4]
    back = load_checkpoint(path)
    assert back.step == 12
    assert back.seed == 3
    for a, b in zip(back.params.arrays(), params.arrays()):
        assert np.array_equal(a, b)
    assert np.array_equal(back.params.action_scale, params.action_scale)


def test_truncated_checkpoint(tmp_path):
    path = save_checkpoint(Checkpoint(_random_params([68, 8, 4]), 1, 0.1), tmp_path / "a.ckpt")
    path.write_bytes(path.read_bytes()[:-16])
    with pytest.raises(CorruptCheckpoint):
        load_checkpoint(path)
    with pytest.raises(CorruptCheckpoint):
        load_checkpoint(tmp_path / "missing.ckpt")


def test_train_config_validation():
    with pytest.raises(ConfigError):
        TrainConfig(steps=2, checkpoint_count=3)
    with pytest.raises(ConfigError):
        TrainConfig(optimizer="rmsprop")
    with pytest.raises(ConfigError):
        make_optimizer("lbfgs", 0.1)


SMALL = dict(steps=150, batch_size=32, learning_rate=1e-2, checkpoint_count=3, hidden=(16, 16))


def _pools():
    real = concat_datasets(
        make_dataset([6, 6], action=(0.01, -0.02, 0.0, 1.0), image_value=40),
        make_dataset([8], action=(-0.03, 0.02, 0.1, 0.0), image_value=160),
        name="real",
    )
    sim = make_dataset([10], source=SourceTag.DIGITAL_COUSIN, action=(0.03, 0.01, 0.1, 0.0), image_value=200)
    return real, sim


def test_training_reduces_probe_loss():
    real, _ = _pools()
    run = train_run(MixtureSpec.real_only([real]), TrainConfig(seed=4, **SMALL))
    assert [c.step for c in run.checkpoints] == [50, 100, 150]
    assert run.checkpoints[-1].train_loss < run.initial_loss
    assert len(run.trace) == 150


def test_training_is_deterministic():
    real, sim = _pools()
    spec = MixtureSpec([real], [sim], alpha=0.5)
    a = train(spec, TrainConfig(seed=9, **SMALL))
    b = train(spec, TrainConfig(seed=9, **SMALL))
    for x, y in zip(a[-1].params.arrays(), b[-1].params.arrays()):
        assert np.array_equal(x, y)


def test_zero_alpha_equals_real_only_training():
    real, sim = _pools()
    config = TrainConfig(seed=2, **SMALL)
    mixed = train(MixtureSpec([real], [sim], alpha=0.0), config)[-1].params
    alone = train(MixtureSpec.real_only([real]), config)[-1].params
    for x, y in zip(mixed.arrays() + [mixed.obs_mean], alone.arrays() + [alone.obs_mean]):
        assert np.array_equal(x, y)


def test_unit_alpha_equals_sim_only_training():
    real, sim = _pools()
    config = TrainConfig(seed=2, **SMALL)
    mixed = train(MixtureSpec([real], [sim], alpha=1.0), config)[-1].params
    alone = train(MixtureSpec.sim_only([sim]), config)[-1].params
    for x, y in zip(mixed.arrays(), alone.arrays()):
        assert np.array_equal(x, y)


def test_divergence_is_reported():
    real, _ = _pools()
    config = TrainConfig(seed=1, steps=30, batch_size=8, learning_rate=1e6, optimizer="sgd", checkpoint_count=3, hidden=(8,))
    with pytest.raises(TrainingDiverged):
        train(MixtureSpec.real_only([make_dataset([6], action=(0.05, -0.05, 0.2, 1.0)), real]), config)


def test_expert_scores_full_success(cup_world):
    assert evaluate(ExpertController(cup_world.task, jitter_std=0.0), cup_world, 3, seed=1) == 1.0


def test_evaluation_ignores_thread_count(cup_world):
    short = cup_world.evolve(episode_horizon=8)
    params = _random_params([68, 8, 4], seed=5)
    assert evaluate_episodes(params, short, 4, seed=3, threads=1) == evaluate_episodes(params, short, 4, seed=3, threads=2)


def test_mixed_training_standardizes_on_real_frames():
    real, sim = _pools()
    config = TrainConfig(seed=2, **SMALL)
    mixed = MixtureSpec([real], [sim], alpha=0.9)
    alone = MixtureSpec.real_only([real])
    a = initial_params(*mixture_arrays(mixed), assign_weights(mixed), config)
    b = initial_params(*mixture_arrays(alone), assign_weights(alone), config)
    assert np.array_equal(a.obs_mean, b.obs_mean)
    assert np.array_equal(a.obs_std, b.obs_std)
    assert np.array_equal(a.action_offset, b.action_offset)
    sim_only = MixtureSpec.sim_only([sim])
    c = initial_params(*mixture_arrays(sim_only), assign_weights(sim_only), config)
    assert not np.array_equal(a.action_offset, c.action_offset)


@pytest.mark.slow
def test_random_weights_rarely_succeed(cup_world):
    scores = []
    for k in range(10):
        params = PolicyParams.init([68, 32, 4], new_rng(100 + k))
        scores += evaluate_episodes(params, cup_world, 10, seed=21, threads=1)
    assert sum(scores) / len(scores) <= 0.1
