"""First-order update rules sharing a stateful ``step`` interface."""
from __future__ import annotations

import numpy as np

DEFAULT_LEARNING_RATES = {
    "gradient_descent": 0.1,
    "adam": 0.01,
    "rmsprop": 0.001,
    "adagrad": 0.01,
}
OPTIMIZER_KINDS = tuple(DEFAULT_LEARNING_RATES)


class Optimizer:
    kind = None

    def __init__(self, lr=None, eps=1e-8):
        self.lr = DEFAULT_LEARNING_RATES[self.kind] if lr is None else float(lr)
        self.eps = eps
        self.t = 0

    def step(self, theta, grad):
        """Return updated parameters; internal accumulators advance by one step."""
        theta = np.asarray(theta, dtype=float)
        grad = np.asarray(grad, dtype=float)
        if theta.shape != grad.shape:
            raise ValueError(f"gradient shape {grad.shape} does not match parameter shape {theta.shape}")
        if not np.all(np.isfinite(grad)):
            raise ValueError("gradient contains non-finite entries")
        self.t += 1
        return theta - self._delta(grad)

    def _delta(self, grad):
        raise NotImplementedError

    def hyperparameters(self) -> dict:
        return {"kind": self.kind, "lr": self.lr, "eps": self.eps}


class GradientDescent(Optimizer):
    kind = "gradient_descent"

    def _delta(self, grad):
        return self.lr * grad


class Adam(Optimizer):
    kind = "adam"

    def __init__(self, lr=None, beta1=0.9, beta2=0.999, eps=1e-8):
        super().__init__(lr, eps)
        self.beta1, self.beta2 = beta1, beta2
        self.m = None
        self.v = None

    def _delta(self, grad):
        if self.m is None:
            self.m, self.v = np.zeros_like(grad), np.zeros_like(grad)
        self.m = self.beta1 * self.m + (1 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1 - self.beta2) * grad**2
        m_hat = self.m / (1 - self.beta1**self.t)
        v_hat = self.v / (1 - self.beta2**self.t)
        return self.lr * m_hat / (np.sqrt(v_hat) + self.eps)

    def hyperparameters(self):
        return {**super().hyperparameters(), "beta1": self.beta1, "beta2": self.beta2}


class RMSProp(Optimizer):
    kind = "rmsprop"

    def __init__(self, lr=None, decay=0.9, eps=1e-8):
        super().__init__(lr, eps)
        self.decay = decay
        self.mean_sq = None

    def _delta(self, grad):
        if self.mean_sq is None:
            self.mean_sq = np.zeros_like(grad)
        self.mean_sq = self.decay * self.mean_sq + (1 - self.decay) * grad**2
        return self.lr * grad / (np.sqrt(self.mean_sq) + self.eps)

    def hyperparameters(self):
        return {**super().hyperparameters(), "decay": self.decay}


class Adagrad(Optimizer):
    kind = "adagrad"

    def __init__(self, lr=None, eps=1e-8):
        super().__init__(lr, eps)
        self.sum_sq = None

    def _delta(self, grad):
        if self.sum_sq is None:
            self.sum_sq = np.zeros_like(grad)
        self.sum_sq = self.sum_sq + grad**2
        # eps sits inside the square root here, unlike Adam and RMSProp
        return self.lr * grad / np.sqrt(self.sum_sq + self.eps)


_REGISTRY = {cls.kind: cls for cls in (GradientDescent, Adam, RMSProp, Adagrad)}


def make_optimizer(kind: str, lr=None, **hyper) -> Optimizer:
    try:
        cls = _REGISTRY[kind]
    except KeyError:
        raise ValueError(f"unknown optimizer {kind!r}; expected one of {OPTIMIZER_KINDS}") from None
    return cls(lr=lr, **hyper)


def default_hyperparameters(kind: str) -> Optimizer:
    return make_optimizer(kind)
