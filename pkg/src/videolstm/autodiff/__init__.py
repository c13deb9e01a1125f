"""Minimal reverse-mode automatic differentiation over numpy arrays."""

from .gradcheck import GradCheckResult, check_gradients, numeric_gradient, relative_error
from .ops import (
    add,
    conv2d,
    dense,
    elementwise,
    expand,
    global_norm,
    hadamard,
    log_clamped,
    max_pool2d,
    mean,
    reduce_sum,
    reshape,
    scale,
    sigmoid,
    softmax,
    spatial_softmax,
    split,
    stack,
    sub,
    take_last,
    tanh,
    unstack,
)
from .tensor import Tensor, backward, constant, parameter

__all__ = [
    "GradCheckResult",
    "Tensor",
    "add",
    "backward",
    "check_gradients",
    "constant",
    "conv2d",
    "dense",
    "elementwise",
    "expand",
    "global_norm",
    "hadamard",
    "log_clamped",
    "max_pool2d",
    "mean",
    "numeric_gradient",
    "parameter",
    "reduce_sum",
    "relative_error",
    "reshape",
    "scale",
    "sigmoid",
    "softmax",
    "spatial_softmax",
    "split",
    "stack",
    "sub",
    "take_last",
    "tanh",
    "unstack",
]
