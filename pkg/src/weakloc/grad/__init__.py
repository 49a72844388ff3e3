"""Minimal reverse-mode autodiff engine: tensors, layer ops, Adam, checkpoints."""

from .tensor import (
    Tensor,
    Tape,
    backward,
    no_grad,
    add,
    sub,
    mul,
    exp,
    log,
    square,
    clamp,
    minimum,
    tsum,
    tmean,
    row_sum,
    row_max,
    tile_rows,
    reshape,
)
from .ops import conv2d, maxpool2d, dense, relu, sigmoid, tanh, activation, flatten
from .optim import Adam, AdamState, adam_step
from .checkpoint import save_checkpoint, load_checkpoint
from .net import Net, glorot_uniform, conv_block, pooled_side

__all__ = [
    "Tensor", "Tape", "backward", "no_grad",
    "add", "sub", "mul", "exp", "log", "square", "clamp", "minimum",
    "tsum", "tmean", "row_sum", "row_max", "tile_rows", "reshape",
    "conv2d", "maxpool2d", "dense", "relu", "sigmoid", "tanh", "activation", "flatten",
    "Adam", "AdamState", "adam_step", "save_checkpoint", "load_checkpoint",
    "Net", "glorot_uniform", "conv_block", "pooled_side",
]
