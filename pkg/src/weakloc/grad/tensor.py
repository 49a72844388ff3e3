"""Reverse-mode automatic differentiation on flat float64 arrays.

A ``Tensor`` wraps a contiguous float64 ndarray plus an optional gradient
buffer.  Differentiable operations record themselves onto the active
``Tape`` in execution order, which is a valid topological order by
construction; ``backward(loss)`` replays the recorded rules in reverse.

A tape may be consumed exactly once: calling ``backward`` a second time on
the same tape raises (rejected rather than idempotent, so stale-graph bugs
surface immediately).
"""

from __future__ import annotations

import numpy as np

__all__ = ["Tensor", "Tape", "backward", "no_grad", "active_tape"]

_TAPE_STACK: list["Tape"] = []
_GRAD_ENABLED = True


class Tape:
    """Ordered record of differentiable operations.

    Each entry remembers its input and output tensors and a local backward
    rule.  Entries are appended in execution order, so every operation's
    inputs were recorded (or are leaves) before the operation itself.
    """

    def __init__(self):
        self.ops = []
        self.consumed = False

    def record(self, name, inputs, output, rule):
        self.ops.append(_TapeEntry(name, inputs, output, rule))

    def __len__(self):
        return len(self.ops)

    def __enter__(self):
        _TAPE_STACK.append(self)
        return self

    def __exit__(self, *exc):
        if _TAPE_STACK and _TAPE_STACK[-1] is self:
            _TAPE_STACK.pop()
        return False


class _TapeEntry:
    __slots__ = ("name", "inputs", "output", "rule")

    def __init__(self, name, inputs, output, rule):
        self.name = name
        self.inputs = inputs
        self.output = output
        self.rule = rule


class _NoGrad:
    def __enter__(self):
        global _GRAD_ENABLED
        self._prev = _GRAD_ENABLED
        _GRAD_ENABLED = False
        return self

    def __exit__(self, *exc):
        global _GRAD_ENABLED
        _GRAD_ENABLED = self._prev
        return False


def no_grad():
    """Context manager that disables tape recording (fast inference)."""
    return _NoGrad()


def grad_enabled():
    return _GRAD_ENABLED


def active_tape():
    """The tape new operations will record onto, creating one if needed."""
    if not _TAPE_STACK:
        _TAPE_STACK.append(Tape())
    return _TAPE_STACK[-1]


class Tensor:
    """N-dimensional float64 array with an optional gradient buffer."""

    __slots__ = ("data", "grad", "requires_grad", "name", "_tape")

    def __init__(self, data, requires_grad=False, name=None):
        self.data = np.ascontiguousarray(data, dtype=np.float64)
        self.grad = None
        self.requires_grad = bool(requires_grad)
        self.name = name
        self._tape = None

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def size(self):
        return self.data.size

    def item(self):
        return float(self.data.item())

    def zero_grad(self):
        self.grad = None

    def accumulate_grad(self, g):
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += g

    def detach(self):
        return Tensor(self.data.copy(), requires_grad=False, name=self.name)

    def __repr__(self):
        tag = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad}{tag})"

    # -- arithmetic (same-shape or scalar operands; no general broadcasting) --

    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(_as_tensor(other), self)

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Tensor):
            raise TypeError("tensor/tensor division unsupported; divide by a scalar")
        return mul(self, 1.0 / float(other))

    def __neg__(self):
        return mul(self, -1.0)


def _as_tensor(x):
    if isinstance(x, Tensor):
        return x
    return Tensor(np.asarray(x, dtype=np.float64))


def _result(name, out_data, inputs, rule):
    """Wrap an op result, recording it when gradients are in play."""
    out = Tensor(out_data)
    if _GRAD_ENABLED and any(t.requires_grad for t in inputs):
        out.requires_grad = True
        tape = active_tape()
        tape.record(name, inputs, out, rule)
        out._tape = tape
    return out


def record(name, inputs, out_data, rule):
    """Public hook for layer ops defined outside this module."""
    return _result(name, out_data, inputs, rule)


def backward(loss):
    """Populate ``grad`` on every requires_grad tensor reachable from ``loss``.

    ``loss`` must be a scalar produced by recorded operations.  The tape is
    consumed: a second backward on the same tape raises RuntimeError.
    """
    if not isinstance(loss, Tensor):
        raise TypeError("backward expects a Tensor loss")
    if loss.data.size != 1:
        raise ValueError(f"backward requires a scalar loss, got shape {loss.data.shape}")
    tape = loss._tape
    if tape is None:
        raise RuntimeError("loss has no recorded operations (empty tape or leaf tensor)")
    if tape.consumed:
        raise RuntimeError("tape already consumed by a previous backward")
    tape.consumed = True
    try:
        loss.grad = np.ones_like(loss.data)
        for entry in reversed(tape.ops):
            g = entry.output.grad
            if g is None:
                continue
            entry.rule(g)
    finally:
        tape.ops.clear()
        if _TAPE_STACK and _TAPE_STACK[-1] is tape:
            _TAPE_STACK.pop()


# -- elementwise primitives ------------------------------------------------

def add(a, b):
    a, b = _as_tensor(a), _as_tensor(b)
    _check_elementwise(a, b, "add")

    def rule(g):
        if a.requires_grad:
            a.accumulate_grad(g if a.data.shape == g.shape else g.sum())
        if b.requires_grad:
            b.accumulate_grad(g if b.data.shape == g.shape else g.sum())

    return _result("add", a.data + b.data, (a, b), rule)


def sub(a, b):
    a, b = _as_tensor(a), _as_tensor(b)
    _check_elementwise(a, b, "sub")

    def rule(g):
        if a.requires_grad:
            a.accumulate_grad(g if a.data.shape == g.shape else g.sum())
        if b.requires_grad:
            b.accumulate_grad(-g if b.data.shape == g.shape else -g.sum())

    return _result("sub", a.data - b.data, (a, b), rule)


def mul(a, b):
    a, b = _as_tensor(a), _as_tensor(b)
    _check_elementwise(a, b, "mul")
    ad, bd = a.data, b.data

    def rule(g):
        if a.requires_grad:
            ga = g * bd
            a.accumulate_grad(ga if a.data.shape == ga.shape else ga.sum())
        if b.requires_grad:
            gb = g * ad
            b.accumulate_grad(gb if b.data.shape == gb.shape else gb.sum())

    return _result("mul", ad * bd, (a, b), rule)


def _check_elementwise(a, b, opname):
    if a.data.shape != b.data.shape and a.data.size != 1 and b.data.size != 1:
        raise ValueError(
            f"{opname}: shapes {a.data.shape} and {b.data.shape} differ and neither is scalar"
        )


def exp(x):
    x = _as_tensor(x)
    out_data = np.exp(x.data)

    def rule(g):
        if x.requires_grad:
            x.accumulate_grad(g * out_data)

    return _result("exp", out_data, (x,), rule)


def log(x):
    x = _as_tensor(x)
    xd = x.data

    def rule(g):
        if x.requires_grad:
            x.accumulate_grad(g / xd)

    return _result("log", np.log(xd), (x,), rule)


def square(x):
    x = _as_tensor(x)
    xd = x.data

    def rule(g):
        if x.requires_grad:
            x.accumulate_grad(g * (2.0 * xd))

    return _result("square", xd * xd, (x,), rule)


def clamp(x, lo, hi):
    """Elementwise clip; gradient passes through only inside [lo, hi]."""
    x = _as_tensor(x)
    inside = (x.data >= lo) & (x.data <= hi)

    def rule(g):
        if x.requires_grad:
            x.accumulate_grad(g * inside)

    return _result("clamp", np.clip(x.data, lo, hi), (x,), rule)


def minimum(a, b):
    """Elementwise min; gradient routes to the smaller side (ties: first)."""
    a, b = _as_tensor(a), _as_tensor(b)
    if a.data.shape != b.data.shape:
        raise ValueError(f"minimum: shapes {a.data.shape} and {b.data.shape} differ")
    take_a = a.data <= b.data

    def rule(g):
        if a.requires_grad:
            a.accumulate_grad(g * take_a)
        if b.requires_grad:
            b.accumulate_grad(g * ~take_a)

    return _result("minimum", np.where(take_a, a.data, b.data), (a, b), rule)


def tsum(x):
    x = _as_tensor(x)
    shape = x.data.shape

    def rule(g):
        if x.requires_grad:
            x.accumulate_grad(np.full(shape, g.item()))

    return _result("sum", np.asarray(x.data.sum()), (x,), rule)


def tmean(x):
    x = _as_tensor(x)
    n = x.data.size
    shape = x.data.shape

    def rule(g):
        if x.requires_grad:
            x.accumulate_grad(np.full(shape, g.item() / n))

    return _result("mean", np.asarray(x.data.mean()), (x,), rule)


def row_sum(x):
    """Sum over the last axis of a 2-D tensor: (B, n) -> (B,)."""
    x = _as_tensor(x)
    if x.data.ndim != 2:
        raise ValueError(f"row_sum expects a 2-D tensor, got shape {x.data.shape}")
    n = x.data.shape[1]

    def rule(g):
        if x.requires_grad:
            x.accumulate_grad(np.repeat(g[:, None], n, axis=1))

    return _result("row_sum", x.data.sum(axis=1), (x,), rule)


def row_max(x):
    """Max over the last axis of a 2-D tensor; gradient goes to the first
    maximal element of each row."""
    x = _as_tensor(x)
    if x.data.ndim != 2:
        raise ValueError(f"row_max expects a 2-D tensor, got shape {x.data.shape}")
    idx = np.argmax(x.data, axis=1)
    rows = np.arange(x.data.shape[0])

    def rule(g):
        if x.requires_grad:
            gx = np.zeros_like(x.data)
            gx[rows, idx] = g
            x.accumulate_grad(gx)

    return _result("row_max", x.data[rows, idx], (x,), rule)


def tile_rows(x, n_rows):
    """Repeat a 1-D tensor as rows: (n,) -> (n_rows, n); backward sums rows."""
    x = _as_tensor(x)
    if x.data.ndim != 1:
        raise ValueError(f"tile_rows expects a 1-D tensor, got shape {x.data.shape}")

    def rule(g):
        if x.requires_grad:
            x.accumulate_grad(g.sum(axis=0))

    return _result("tile_rows", np.repeat(x.data[None, :], n_rows, axis=0), (x,), rule)


def reshape(x, shape):
    x = _as_tensor(x)
    old = x.data.shape

    def rule(g):
        if x.requires_grad:
            x.accumulate_grad(g.reshape(old))

    return _result("reshape", x.data.reshape(shape), (x,), rule)
