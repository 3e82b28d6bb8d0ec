from cotrain.policy.checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from cotrain.policy.evaluate import MLPController, evaluate, evaluate_episodes
from cotrain.policy.network import PolicyParams, forward, grad, loss, loss_and_grad, observation_features, predict
from cotrain.policy.optim import SGD, Adam, make_optimizer
from cotrain.policy.train import TrainConfig, TrainRun, checkpoint_steps, train, train_run

__all__ = [
    "Adam",
    "Checkpoint",
    "MLPController",
    "PolicyParams",
    "SGD",
    "TrainConfig",
    "TrainRun",
    "checkpoint_steps",
    "evaluate",
    "evaluate_episodes",
    "forward",
    "grad",
    "load_checkpoint",
    "loss",
    "loss_and_grad",
    "make_optimizer",
    "observation_features",
    "predict",
    "save_checkpoint",
    "train",
    "train_run",
]
