"""Shared plumbing for the small networks built on the autodiff core."""

from __future__ import annotations

import numpy as np

from . import checkpoint
from .ops import conv2d, maxpool2d, relu
from .tensor import Tensor

__all__ = ["Net", "glorot_uniform", "conv_block", "pooled_side"]


def glorot_uniform(rng, shape, fan_in, fan_out):
    """Uniform init in +-sqrt(6 / (fan_in + fan_out))."""
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


def conv_block(x, kernels, bias):
    """conv 3x3 -> relu -> maxpool 2x2, the building block of every net here."""
    return maxpool2d(relu(conv2d(x, kernels, bias)))


def pooled_side(side, n_blocks):
    """Spatial side after ``n_blocks`` of 2x2 ceil-pooling."""
    for _ in range(n_blocks):
        side = (side + 1) // 2
    return side


class Net:
    """Base class holding named trainable parameters.

    Subclasses register parameters with :meth:`add_param` and implement
    ``forward``.  A frozen net (``freeze()``) records nothing on the tape,
    making it safe and cheap to share across evaluators.
    """

    def __init__(self):
        self._params: dict[str, Tensor] = {}

    def add_param(self, name, data):
        t = Tensor(data, requires_grad=True, name=name)
        self._params[name] = t
        return t

    def parameters(self):
        return dict(self._params)

    def freeze(self):
        for p in self._params.values():
            p.requires_grad = False
        return self

    def state(self):
        return {name: p.data.copy() for name, p in self._params.items()}

    def load_state(self, state):
        missing = set(self._params) - set(state)
        if missing:
            raise ValueError(f"checkpoint missing parameters: {sorted(missing)}")
        for name, p in self._params.items():
            arr = np.asarray(state[name], dtype=np.float64)
            if arr.shape != p.data.shape:
                raise ValueError(
                    f"parameter {name!r}: checkpoint shape {arr.shape} != model shape {p.data.shape}"
                )
            p.data = np.ascontiguousarray(arr)
        return self

    def save(self, path):
        checkpoint.save_checkpoint(path, self.state())

    def load(self, path):
        return self.load_state(checkpoint.load_checkpoint(path))
