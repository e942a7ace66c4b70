"""Gradient-norm clipping and the Adam parameter update."""

from __future__ import annotations

import numpy as np

Grads = dict[str, np.ndarray]


def gradient_norm(grads: Grads, order: float = 2.0) -> float:
    """Norm of the concatenation of all gradient arrays."""
    if order == np.inf:
        return max((float(np.abs(g).max()) for g in grads.values() if g.size), default=0.0)
    total = sum(float(np.sum(np.abs(g) ** order)) for g in grads.values())
    return total ** (1.0 / order)


def clip_gradient_norm(grads: Grads, threshold: float, order: float = 2.0) -> tuple[Grads, float]:
    """Scale the whole gradient to norm ``threshold`` if it exceeds it.

    Returns (possibly rescaled gradients, pre-clip norm). Inputs are not
    mutated.
    """
    if threshold <= 0:
        raise ValueError("clip threshold must be positive")
    norm = gradient_norm(grads, order)
    if norm <= threshold:
        return {k: g.copy() for k, g in grads.items()}, norm
    scale = threshold / norm
    return {k: g * scale for k, g in grads.items()}, norm


class Adam:
    """Adam with bias correction (beta1=0.9, beta2=0.999, eps=1e-8)."""

    def __init__(self, params: dict[str, np.ndarray], lr: float,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}

    def step(self, params: dict[str, np.ndarray], grads: Grads) -> None:
        """Update ``params`` in place; rejects non-finite gradients."""
        for name, g in grads.items():
            if not np.all(np.isfinite(g)):
                raise ValueError(f"non-finite gradient for parameter {name}")
        self.t += 1
        bc1 = 1.0 - self.beta1**self.t
        bc2 = 1.0 - self.beta2**self.t
        for name, g in grads.items():
            m = self.m[name]
            v = self.v[name]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            params[name] -= self.lr * (m / bc1) / (np.sqrt(v / bc2) + self.eps)

    def state(self) -> dict:
        return {"t": self.t, "m": self.m, "v": self.v}

    def load_state(self, state: dict) -> None:
        self.t = int(state["t"])
        for k in self.m:
            self.m[k] = np.asarray(state["m"][k], dtype=np.float64)
            self.v[k] = np.asarray(state["v"][k], dtype=np.float64)
