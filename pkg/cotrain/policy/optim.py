from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Type

import numpy as np

from cotrain.errors import ConfigError
from cotrain.policy.network import Layer, PolicyParams


@dataclass
class OptimizerBase:
    name: str
    learning_rate: float

    def step(self, params: PolicyParams, grads: List[Layer]) -> None:
        """Update params in place."""
        raise NotImplementedError


@dataclass
class SGD(OptimizerBase):
    def __init__(self, learning_rate: float) -> None:
        super().__init__(name="sgd", learning_rate=learning_rate)

    def step(self, params: PolicyParams, grads: List[Layer]) -> None:
        for (W, b), (gW, gb) in zip(params.layers, grads):
            W -= self.learning_rate * gW
            b -= self.learning_rate * gb


@dataclass
class Adam(OptimizerBase):
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: List[np.ndarray] = field(default_factory=list)
    v: List[np.ndarray] = field(default_factory=list)

    def __init__(self, learning_rate: float, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8) -> None:
        super().__init__(name="adam", learning_rate=learning_rate)
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = []
        self.v = []

    def step(self, params: PolicyParams, grads: List[Layer]) -> None:
        arrays = params.arrays()
        flat = [g for pair in grads for g in pair]
        if not self.m:
            self.m = [np.zeros_like(a) for a in arrays]
            self.v = [np.zeros_like(a) for a in arrays]
        self.t += 1
        bc1 = 1.0 - self.beta1 ** self.t
        bc2 = 1.0 - self.beta2 ** self.t
        for a, g, m, v in zip(arrays, flat, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            a -= self.learning_rate * (m / bc1) / (np.sqrt(v / bc2) + self.eps)


OPTIMIZERS: Dict[str, Type[OptimizerBase]] = {
    "sgd": SGD,
    "adam": Adam,
}


def make_optimizer(name: str, learning_rate: float) -> OptimizerBase:
    try:
        cls = OPTIMIZERS[name.lower()]
    except KeyError:
        raise ConfigError(f"unknown optimizer {name!r}; choose from {sorted(OPTIMIZERS)}") from None
    return cls(learning_rate)  # type: ignore[call-arg]
