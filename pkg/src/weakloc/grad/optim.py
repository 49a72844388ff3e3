"""Adam optimiser with bias correction."""

from __future__ import annotations

import numpy as np

__all__ = ["AdamState", "adam_step", "Adam"]


class AdamState:
    """Per-parameter first/second moment buffers and the shared step count."""

    def __init__(self, shape, lr=0.0003, beta1=0.9, beta2=0.999, eps=1e-8):
        self.m = np.zeros(shape)
        self.v = np.zeros(shape)
        self.t = 0
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps


def adam_step(param, grad, state, name="param"):
    """One in-place Adam update of ``param`` (an ndarray) from ``grad``.

    Raises on non-finite gradients, naming the offending parameter.
    """
    if grad.shape != param.shape:
        raise ValueError(f"adam_step: grad shape {grad.shape} != param shape {param.shape}")
    if not np.isfinite(grad).all():
        raise FloatingPointError(f"non-finite gradient for parameter {name!r}")
    state.t += 1
    state.m = state.beta1 * state.m + (1.0 - state.beta1) * grad
    state.v = state.beta2 * state.v + (1.0 - state.beta2) * grad * grad
    mhat = state.m / (1.0 - state.beta1 ** state.t)
    vhat = state.v / (1.0 - state.beta2 ** state.t)
    param -= state.lr * mhat / (np.sqrt(vhat) + state.eps)
    return param


class Adam:
    """Adam over a named-parameter dict, reading and clearing ``.grad``."""

    def __init__(self, params, lr=0.0003, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = dict(params)
        self.states = {
            name: AdamState(p.data.shape, lr, beta1, beta2, eps)
            for name, p in self.params.items()
        }

    def step(self):
        for name, p in self.params.items():
            if p.grad is None:
                continue
            adam_step(p.data, p.grad, self.states[name], name=name)
            p.grad = None

    def zero_grad(self):
        for p in self.params.values():
            p.grad = None
