"""MLP visuomotor policy with hand-written reverse-mode gradients.

Input: 8x8 block-mean grayscale image (values in [0, 1]) concatenated with
proprio. Hidden layers use tanh; the output layer is linear. Inputs are
standardized with obs_mean/obs_std and outputs mapped to action units with
action_offset + action_scale * out. The loss is the mean squared error of
the normalized residual (pred - target) / action_scale, i.e. a fixed-variance
Gaussian negative log-likelihood up to a constant.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from cotrain.config import DEFAULTS
from cotrain.errors import DimensionMismatch
from cotrain.trajectory.types import Action, ObservationFrame

Layer = Tuple[np.ndarray, np.ndarray]


def image_features(images: np.ndarray, grid: int = DEFAULTS.image_grid) -> np.ndarray:
    """(N, H, W, 3) uint8 -> (N, grid*grid) block-mean grayscale in [0, 1]."""
    n, h, w, _ = images.shape
    if h % grid or w % grid:
        raise DimensionMismatch(f"dimension mismatch: image {h}x{w} does not pool to a {grid}x{grid} grid")
    gray = images.astype(np.float64).mean(axis=-1) / 255.0
    pooled = gray.reshape(n, grid, h // grid, grid, w // grid).mean(axis=(2, 4))
    return pooled.reshape(n, grid * grid)


def observation_features(images: np.ndarray, proprio: np.ndarray, grid: int = DEFAULTS.image_grid) -> np.ndarray:
    return np.concatenate([image_features(images, grid), np.asarray(proprio, dtype=np.float64)], axis=1)


@dataclass
class PolicyParams:
    layers: List[Layer]
    obs_mean: Optional[np.ndarray] = None
    obs_std: Optional[np.ndarray] = None
    action_offset: Optional[np.ndarray] = None
    action_scale: Optional[np.ndarray] = None
    action_low: np.ndarray = field(default_factory=lambda: np.asarray(DEFAULTS.action_low, dtype=np.float64))
    action_high: np.ndarray = field(default_factory=lambda: np.asarray(DEFAULTS.action_high, dtype=np.float64))

    def __post_init__(self) -> None:
        if not self.layers:
            raise ValueError("PolicyParams needs at least one layer")
        for i, (W, b) in enumerate(self.layers):
            if W.ndim != 2 or b.shape != (W.shape[1],):
                raise DimensionMismatch(f"dimension mismatch: layer {i} has W {W.shape}, b {b.shape}")
            if i and W.shape[0] != self.layers[i - 1][0].shape[1]:
                raise DimensionMismatch(
                    f"dimension mismatch: layer {i} takes {W.shape[0]} inputs, previous emits {self.layers[i - 1][0].shape[1]}"
                )
        if self.obs_mean is None:
            self.obs_mean = np.zeros(self.in_dim)
        if self.obs_std is None:
            self.obs_std = np.ones(self.in_dim)
        if self.action_offset is None:
            self.action_offset = np.zeros(self.out_dim)
        if self.action_scale is None:
            self.action_scale = np.ones(self.out_dim)
        if self.action_low.shape != (self.out_dim,):
            self.action_low = np.full(self.out_dim, -np.inf)
            self.action_high = np.full(self.out_dim, np.inf)

    @property
    def in_dim(self) -> int:
        return int(self.layers[0][0].shape[0])

    @property
    def out_dim(self) -> int:
        return int(self.layers[-1][0].shape[1])

    @property
    def dims(self) -> List[int]:
        return [self.in_dim] + [int(W.shape[1]) for W, _ in self.layers]

    @classmethod
    def init(cls, dims: Sequence[int], rng: np.random.Generator) -> "PolicyParams":
        """Glorot-uniform weights, zero biases."""
        layers: List[Layer] = []
        for fan_in, fan_out in zip(dims[:-1], dims[1:]):
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            layers.append((rng.uniform(-limit, limit, size=(fan_in, fan_out)), np.zeros(fan_out)))
        return cls(layers=layers)

    @classmethod
    def zeros(cls, dims: Sequence[int]) -> "PolicyParams":
        return cls(layers=[(np.zeros((a, b)), np.zeros(b)) for a, b in zip(dims[:-1], dims[1:])])

    def copy(self) -> "PolicyParams":
        return PolicyParams(
            layers=[(W.copy(), b.copy()) for W, b in self.layers],
            obs_mean=self.obs_mean.copy(),
            obs_std=self.obs_std.copy(),
            action_offset=self.action_offset.copy(),
            action_scale=self.action_scale.copy(),
            action_low=self.action_low.copy(),
            action_high=self.action_high.copy(),
        )

    def arrays(self) -> List[np.ndarray]:
        """Trainable arrays, W then b per layer (views, not copies)."""
        out: List[np.ndarray] = []
        for W, b in self.layers:
            out.extend((W, b))
        return out

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(a)) for a in self.arrays())


def _forward(params: PolicyParams, X: np.ndarray) -> Tuple[np.ndarray, List[np.ndarray]]:
    """Normalized output and the activations feeding each layer."""
    h = (X - params.obs_mean) / params.obs_std
    acts = [h]
    last = len(params.layers) - 1
    for i, (W, b) in enumerate(params.layers):
        z = h @ W + b
        if i == last:
            return z, acts
        h = np.tanh(z)
        acts.append(h)
    raise AssertionError("unreachable")


def predict(params: PolicyParams, X: np.ndarray) -> np.ndarray:
    """Pre-clamp actions for a feature matrix (N, in_dim)."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != params.in_dim:
        raise DimensionMismatch(f"dimension mismatch: features have {X.shape[1]} dims, policy expects {params.in_dim}")
    out, _ = _forward(params, X)
    return params.action_offset + params.action_scale * out


def forward(params: PolicyParams, obs: ObservationFrame) -> Action:
    feats = observation_features(np.asarray(obs.image)[None], np.asarray(obs.proprio)[None])
    pred = predict(params, feats)[0]
    pred = np.nan_to_num(pred, nan=0.0, posinf=0.0, neginf=0.0)
    return Action(np.clip(pred, params.action_low, params.action_high))


def _normalized_targets(params: PolicyParams, Y: np.ndarray) -> np.ndarray:
    return (np.asarray(Y, dtype=np.float64) - params.action_offset) / params.action_scale


def loss(params: PolicyParams, X: np.ndarray, Y: np.ndarray) -> float:
    if len(X) == 0:
        raise ValueError("loss needs a nonempty batch")
    out, _ = _forward(params, np.asarray(X, dtype=np.float64))
    r = out - _normalized_targets(params, Y)
    return float(np.mean(r * r))


def loss_and_grad(params: PolicyParams, X: np.ndarray, Y: np.ndarray) -> Tuple[float, List[Layer]]:
    X = np.asarray(X, dtype=np.float64)
    if len(X) == 0:
        raise ValueError("grad needs a nonempty batch")
    out, acts = _forward(params, X)
    r = out - _normalized_targets(params, Y)
    value = float(np.mean(r * r))

    g = 2.0 * r / r.size
    grads: List[Layer] = [None] * len(params.layers)  # type: ignore[list-item]
    for i in range(len(params.layers) - 1, -1, -1):
        W, _ = params.layers[i]
        a = acts[i]
        grads[i] = (a.T @ g, g.sum(axis=0))
        if i:
            g = (g @ W.T) * (1.0 - a * a)
    return value, grads


def grad(params: PolicyParams, X: np.ndarray, Y: np.ndarray) -> List[Layer]:
    return loss_and_grad(params, X, Y)[1]
