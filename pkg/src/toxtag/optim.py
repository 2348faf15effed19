"""Adam with decoupled weight decay over named numpy parameter tensors."""

from __future__ import annotations

import numpy as np

from .errors import ToxtagError


class AdamW:
    """Updates parameters in place; moment state is keyed by parameter name."""

    def __init__(
        self,
        params: dict[str, np.ndarray],
        learning_rate: float,
        beta1: float = 0.9,
        beta2: float = 0.999,
        epsilon: float = 1e-8,
        weight_decay: float = 0.0,
    ):
        if learning_rate <= 0:
            raise ToxtagError(f"learning rate must be positive, got {learning_rate}")
        self.params = params
        self.lr = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.weight_decay = weight_decay
        self._m = {k: np.zeros_like(v) for k, v in params.items()}
        self._v = {k: np.zeros_like(v) for k, v in params.items()}
        self._t = 0

    def step(self, grads: dict[str, np.ndarray]) -> None:
        self._t += 1
        bc1 = 1.0 - self.beta1**self._t
        bc2 = 1.0 - self.beta2**self._t
        for name, g in grads.items():
            p = self.params[name]
            m = self._m[name]
            v = self._v[name]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * np.square(g)
            update = (m / bc1) / (np.sqrt(v / bc2) + self.epsilon)
            if self.weight_decay:
                update = update + self.weight_decay * p
            p -= self.lr * update
