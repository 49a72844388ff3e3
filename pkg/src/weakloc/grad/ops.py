"""Differentiable layer operations for small convolutional networks.

All operations accept a single sample (conv/pool: ``(C, H, W)``, dense:
``(n,)``) or a leading batch axis.  Convolutions are 3x3, stride 1, same
padding; pooling is 2x2 stride 2 with partial windows on odd edges.
Convolution runs as im2col + GEMM, processed in batch chunks to stay
cache-resident; the input gradient is the same-padded convolution with the
channel-transposed, spatially flipped kernels.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .tensor import Tensor, _as_tensor, record

__all__ = ["conv2d", "maxpool2d", "dense", "relu", "sigmoid", "tanh", "activation", "flatten"]

_CONV_CHUNK = 32  # batch rows per im2col buffer


def _im2col3(x):
    """(B, C, H, W) -> (B*H*W, C*9) patch matrix for a 3x3 same-pad kernel."""
    b, c, h, w = x.shape
    xp = np.pad(x, ((0, 0), (0, 0), (1, 1), (1, 1)))
    v = sliding_window_view(xp, (3, 3), axis=(2, 3))  # (B, C, H, W, 3, 3)
    return v.transpose(0, 2, 3, 1, 4, 5).reshape(b * h * w, c * 9)


def _conv_forward(x, kflat, bias):
    """x (B, C, H, W), kflat (O, C*9) -> (B, O, H, W)."""
    b, c, h, w = x.shape
    o = kflat.shape[0]
    out = np.empty((b, o, h, w), dtype=np.float64)
    for s in range(0, b, _CONV_CHUNK):
        e = min(s + _CONV_CHUNK, b)
        col = _im2col3(x[s:e])
        res = col @ kflat.T  # ((e-s)*H*W, O)
        out[s:e] = res.reshape(e - s, h, w, o).transpose(0, 3, 1, 2)
    if bias is not None:
        out += bias[None, :, None, None]
    return out


def _conv_grad_weights(x, gy):
    """Accumulate dL/dW as gy^T @ im2col(x), chunked over the batch."""
    b, c, h, w = x.shape
    o = gy.shape[1]
    gw = np.zeros((o, c * 9), dtype=np.float64)
    for s in range(0, b, _CONV_CHUNK):
        e = min(s + _CONV_CHUNK, b)
        col = _im2col3(x[s:e])
        gyf = gy[s:e].transpose(0, 2, 3, 1).reshape((e - s) * h * w, o)
        gw += gyf.T @ col
    return gw


def conv2d(x, kernels, bias):
    """3x3 same-padding stride-1 convolution.

    x: Tensor (C_in, H, W) or (B, C_in, H, W); kernels: (C_out, C_in, 3, 3);
    bias: (C_out,).  Output spatial size equals input spatial size.
    """
    x, kernels, bias = _as_tensor(x), _as_tensor(kernels), _as_tensor(bias)
    single = x.data.ndim == 3
    xd = x.data[None] if single else x.data
    if xd.ndim != 4:
        raise ValueError(f"conv2d: input must be (C,H,W) or (B,C,H,W), got {x.data.shape}")
    kd = kernels.data
    if kd.ndim != 4 or kd.shape[2:] != (3, 3):
        raise ValueError(f"conv2d: kernels must be (C_out,C_in,3,3), got {kd.shape}")
    if xd.shape[1] != kd.shape[1]:
        raise ValueError(
            f"conv2d: input channels {xd.shape[1]} != kernel input channels {kd.shape[1]}"
        )
    if bias.data.shape != (kd.shape[0],):
        raise ValueError(
            f"conv2d: bias shape {bias.data.shape} != (C_out,) = ({kd.shape[0]},)"
        )
    o, c = kd.shape[0], kd.shape[1]
    kflat = kd.reshape(o, c * 9)
    out = _conv_forward(xd, kflat, bias.data)

    def rule(g):
        gy = g[None] if single else g
        if x.requires_grad:
            # grad wrt input = same-pad conv of gy with flipped, transposed kernels
            kt = kd.transpose(1, 0, 2, 3)[:, :, ::-1, ::-1].reshape(c, o * 9)
            gx = _conv_forward(gy, kt, None)
            x.accumulate_grad(gx[0] if single else gx)
        if kernels.requires_grad:
            kernels.accumulate_grad(_conv_grad_weights(xd, gy).reshape(kd.shape))
        if bias.requires_grad:
            bias.accumulate_grad(gy.sum(axis=(0, 2, 3)))

    return record("conv2d", (x, kernels, bias), out[0] if single else out, rule)


def maxpool2d(x):
    """2x2 stride-2 max pooling; odd trailing rows/columns pool the partial
    window.  Backward routes the gradient to the first (row-major) maximal
    element of each window."""
    x = _as_tensor(x)
    single = x.data.ndim == 3
    xd = x.data[None] if single else x.data
    if xd.ndim != 4:
        raise ValueError(f"maxpool2d: input must be (C,H,W) or (B,C,H,W), got {x.data.shape}")
    b, c, h, w = xd.shape
    if h == 0 or w == 0:
        raise ValueError("maxpool2d: empty spatial dimensions")
    hp, wp = h + (h % 2), w + (w % 2)
    xpad = xd
    if (hp, wp) != (h, w):
        xpad = np.full((b, c, hp, wp), -np.inf)
        xpad[:, :, :h, :w] = xd
    win = xpad.reshape(b, c, hp // 2, 2, wp // 2, 2).transpose(0, 1, 2, 4, 3, 5)
    win = win.reshape(b, c, hp // 2, wp // 2, 4)  # window order (0,0),(0,1),(1,0),(1,1)
    idx = np.argmax(win, axis=4)
    out = np.take_along_axis(win, idx[..., None], axis=4)[..., 0]

    def rule(g):
        gy = g[None] if single else g
        gwin = np.zeros((b, c, hp // 2, wp // 2, 4))
        np.put_along_axis(gwin, idx[..., None], gy[..., None], axis=4)
        gx = gwin.reshape(b, c, hp // 2, wp // 2, 2, 2).transpose(0, 1, 2, 4, 3, 5)
        gx = gx.reshape(b, c, hp, wp)[:, :, :h, :w]
        x.accumulate_grad(gx[0] if single else np.ascontiguousarray(gx))

    return record("maxpool2d", (x,), out[0] if single else out, rule)


def dense(x, weights, bias):
    """Affine layer: out_i = sum_j W_ij x_j + b_i, batched over rows."""
    x, weights, bias = _as_tensor(x), _as_tensor(weights), _as_tensor(bias)
    single = x.data.ndim == 1
    xd = x.data[None] if single else x.data
    wd, bd = weights.data, bias.data
    if xd.ndim != 2:
        raise ValueError(f"dense: input must be (n,) or (B,n), got {x.data.shape}")
    if wd.ndim != 2 or wd.shape[1] != xd.shape[1]:
        raise ValueError(
            f"dense: weights {wd.shape} incompatible with input width {xd.shape[1]}"
        )
    if bd.shape != (wd.shape[0],):
        raise ValueError(f"dense: bias shape {bd.shape} != ({wd.shape[0]},)")
    out = xd @ wd.T + bd

    def rule(g):
        gy = g[None] if single else g
        if x.requires_grad:
            gx = gy @ wd
            x.accumulate_grad(gx[0] if single else gx)
        if weights.requires_grad:
            weights.accumulate_grad(gy.T @ xd)
        if bias.requires_grad:
            bias.accumulate_grad(gy.sum(axis=0))

    return record("dense", (x, weights, bias), out[0] if single else out, rule)


def relu(x):
    x = _as_tensor(x)
    mask = x.data > 0

    def rule(g):
        if x.requires_grad:
            x.accumulate_grad(g * mask)

    return record("relu", (x,), np.where(mask, x.data, 0.0), rule)


def sigmoid(x):
    x = _as_tensor(x)
    out = 1.0 / (1.0 + np.exp(-x.data))

    def rule(g):
        if x.requires_grad:
            x.accumulate_grad(g * out * (1.0 - out))

    return record("sigmoid", (x,), out, rule)


def tanh(x):
    x = _as_tensor(x)
    out = np.tanh(x.data)

    def rule(g):
        if x.requires_grad:
            x.accumulate_grad(g * (1.0 - out * out))

    return record("tanh", (x,), out, rule)


_ACTIVATIONS = {"relu": relu, "sigmoid": sigmoid, "tanh": tanh}


def activation(x, kind):
    """Elementwise activation, kind in {relu, sigmoid, tanh}."""
    try:
        return _ACTIVATIONS[kind](x)
    except KeyError:
        raise ValueError(f"unknown activation {kind!r}; expected one of {sorted(_ACTIVATIONS)}")


def flatten(x):
    """(C, H, W) -> (C*H*W,) or (B, C, H, W) -> (B, C*H*W)."""
    from .tensor import reshape

    x = _as_tensor(x)
    if x.data.ndim == 3:
        return reshape(x, (x.data.size,))
    if x.data.ndim == 4:
        return reshape(x, (x.data.shape[0], -1))
    raise ValueError(f"flatten expects 3-D or 4-D input, got {x.data.shape}")
