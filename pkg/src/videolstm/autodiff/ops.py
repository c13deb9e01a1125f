"""Differentiable operators over :class:`~videolstm.autodiff.tensor.Tensor`.

Every operator accepts optional leading batch axes; no implicit broadcasting is
performed, so binary operators require identical shapes.
"""

from __future__ import annotations

from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..errors import ConfigurationError, ShapeError, UsageError
from .tensor import Tensor, make_node

Axes = Union[int, Tuple[int, ...]]


def _require_same_shape(a: Tensor, b: Tensor, op: str) -> None:
    if a.shape != b.shape:
        raise ShapeError(f"{op}: shape mismatch {a.shape} vs {b.shape}")


def _normalize_axes(axes: Optional[Axes], ndim: int) -> Tuple[int, ...]:
    if axes is None:
        return tuple(range(ndim))
    if isinstance(axes, int):
        axes = (axes,)
    return tuple(sorted(ax % ndim for ax in axes))


# ---------------------------------------------------------------------------
# elementwise


def add(a: Tensor, b: Tensor) -> Tensor:
    _require_same_shape(a, b, "add")
    return make_node(a.data + b.data, (a, b), lambda g: (g, g), "add")


def sub(a: Tensor, b: Tensor) -> Tensor:
    _require_same_shape(a, b, "sub")
    return make_node(a.data - b.data, (a, b), lambda g: (g, -g), "sub")


def hadamard(a: Tensor, b: Tensor) -> Tensor:
    _require_same_shape(a, b, "hadamard")
    return make_node(
        a.data * b.data,
        (a, b),
        lambda g: (g * b.data, g * a.data),
        "hadamard",
    )


def scale(a: Tensor, factor: float) -> Tensor:
    factor = float(factor)
    return make_node(a.data * factor, (a,), lambda g: (g * factor,), "scale")


def sigmoid(a: Tensor) -> Tensor:
    # tanh form stays finite for large |x|
    y = 0.5 * (1.0 + np.tanh(0.5 * a.data))
    return make_node(y, (a,), lambda g: (g * y * (1.0 - y),), "sigmoid")


def tanh(a: Tensor) -> Tensor:
    y = np.tanh(a.data)
    return make_node(y, (a,), lambda g: (g * (1.0 - y * y),), "tanh")


def log_clamped(a: Tensor, floor: float = 1e-12) -> Tensor:
    """Natural log of ``max(a, floor)``; no gradient flows through clamped entries."""
    safe = np.maximum(a.data, floor)
    y = np.log(safe)
    active = a.data > floor
    return make_node(y, (a,), lambda g: (np.where(active, g / safe, 0.0),), "log")


_ELEMENTWISE_UNARY = {"sigmoid": sigmoid, "tanh": tanh}
_ELEMENTWISE_BINARY = {"hadamard": hadamard, "add": add}


def elementwise(op: str, a: Tensor, b: Optional[Tensor] = None, *, factor: float = 1.0) -> Tensor:
    """Dispatch one of ``sigmoid``, ``tanh``, ``hadamard``, ``add`` or ``scale``."""
    if op in _ELEMENTWISE_UNARY:
        return _ELEMENTWISE_UNARY[op](a)
    if op in _ELEMENTWISE_BINARY:
        if b is None:
            raise UsageError(f"elementwise '{op}' needs a second operand")
        return _ELEMENTWISE_BINARY[op](a, b)
    if op == "scale":
        return scale(a, factor)
    raise UsageError(f"Unknown elementwise op '{op}'")


# ---------------------------------------------------------------------------
# affine maps


def dense(x: Tensor, weights: Tensor, bias: Optional[Tensor] = None) -> Tensor:
    """Affine map over the last axis: ``x @ W + b``."""
    if weights.ndim != 2:
        raise ShapeError(f"dense: weights must be a matrix, got shape {weights.shape}")
    d_in, d_out = weights.shape
    if x.ndim < 1 or x.shape[-1] != d_in:
        raise ShapeError(f"dense: input last axis {x.shape} does not match weights {weights.shape}")
    if bias is not None and bias.shape != (d_out,):
        raise ShapeError(f"dense: bias shape {bias.shape} != ({d_out},)")

    out = x.data @ weights.data
    if bias is not None:
        out = out + bias.data

    def _backward(g: np.ndarray):
        g2 = g.reshape(-1, d_out)
        x2 = x.data.reshape(-1, d_in)
        gx = g @ weights.data.T
        gw = x2.T @ g2
        gb = g2.sum(axis=0) if bias is not None else None
        return (gx, gw, gb) if bias is not None else (gx, gw)

    parents = (x, weights, bias) if bias is not None else (x, weights)
    return make_node(out, parents, _backward, "dense")


def _im2col(data: np.ndarray, k: int) -> np.ndarray:
    pad = (k - 1) // 2
    lead = data.shape[:-3]
    h, w, c = data.shape[-3:]
    widths = [(0, 0)] * len(lead) + [(pad, pad), (pad, pad), (0, 0)]
    padded = np.pad(data, widths)
    windows = sliding_window_view(padded, (k, k), axis=(-3, -2))
    windows = np.moveaxis(windows, -3, -1)
    return windows.reshape(*lead, h, w, k * k * c)


def conv2d(x: Tensor, kernel: Tensor, bias: Optional[Tensor] = None) -> Tensor:
    """Same-padded 2-d cross-correlation over channels-last maps.

    ``x`` is ``(..., H, W, Cin)``, ``kernel`` is ``(k, k, Cin, Cout)`` with odd ``k``.
    """
    if kernel.ndim != 4:
        raise ShapeError(f"conv2d: kernel must be k×k×Cin×Cout, got {kernel.shape}")
    k, k2, c_in, c_out = kernel.shape
    if k != k2:
        raise ConfigurationError(f"conv2d: kernel must be square, got {k}×{k2}")
    if k % 2 == 0:
        raise ConfigurationError(f"conv2d: kernel size must be odd, got {k}")
    if x.ndim < 3 or x.shape[-1] != c_in:
        raise ShapeError(f"conv2d: input {x.shape} does not have {c_in} channels")
    if bias is not None and bias.shape != (c_out,):
        raise ShapeError(f"conv2d: bias shape {bias.shape} != ({c_out},)")

    h, w = x.shape[-3], x.shape[-2]
    pad = (k - 1) // 2
    kmat = kernel.data.reshape(k * k * c_in, c_out)
    out = _im2col(x.data, k) @ kmat
    if bias is not None:
        out = out + bias.data

    def _backward(g: np.ndarray):
        cols = _im2col(x.data, k)
        g2 = g.reshape(-1, c_out)
        gk = (cols.reshape(-1, k * k * c_in).T @ g2).reshape(kernel.shape)
        gcols = (g @ kmat.T).reshape(*g.shape[:-1], k, k, c_in)
        lead = x.shape[:-3]
        gpad = np.zeros((*lead, h + 2 * pad, w + 2 * pad, c_in))
        for di in range(k):
            for dj in range(k):
                gpad[..., di : di + h, dj : dj + w, :] += gcols[..., di, dj, :]
        gx = gpad[..., pad : pad + h, pad : pad + w, :]
        if bias is None:
            return gx, gk
        return gx, gk, g2.sum(axis=0)

    parents = (x, kernel, bias) if bias is not None else (x, kernel)
    return make_node(out, parents, _backward, "conv2d")


def max_pool2d(x: Tensor, size: int = 2) -> Tensor:
    """Non-overlapping ``size``×``size`` max pooling over ``(..., H, W, C)``."""
    if x.ndim < 3:
        raise ShapeError(f"max_pool2d: expected (..., H, W, C), got {x.shape}")
    h, w, c = x.shape[-3:]
    if h % size or w % size:
        raise ConfigurationError(f"max_pool2d: extents {h}×{w} not divisible by {size}")
    lead = x.shape[:-3]
    n = len(lead)
    ho, wo = h // size, w // size
    perm = list(range(n)) + [n, n + 2, n + 4, n + 1, n + 3]
    blocks = (
        x.data.reshape(*lead, ho, size, wo, size, c)
        .transpose(perm)
        .reshape(*lead, ho, wo, c, size * size)
    )
    idx = np.argmax(blocks, axis=-1)[..., None]
    out = np.take_along_axis(blocks, idx, axis=-1)[..., 0]
    inverse = np.argsort(perm)

    def _backward(g: np.ndarray):
        gblocks = np.zeros(blocks.shape)
        np.put_along_axis(gblocks, idx, g[..., None], axis=-1)
        gx = gblocks.reshape(*lead, ho, wo, c, size, size).transpose(inverse).reshape(x.shape)
        return (gx,)

    return make_node(out, (x,), _backward, "max_pool2d")


# ---------------------------------------------------------------------------
# shape manipulation and reductions


def reshape(a: Tensor, shape: Sequence[int]) -> Tensor:
    out = a.data.reshape(tuple(shape))
    return make_node(out, (a,), lambda g: (g.reshape(a.shape),), "reshape")


def reduce_sum(a: Tensor, axis: Optional[Axes] = None) -> Tensor:
    axes = _normalize_axes(axis, a.ndim)
    out = a.data.sum(axis=axes)

    def _backward(g: np.ndarray):
        return (np.broadcast_to(np.expand_dims(g, axes), a.shape),)

    return make_node(out, (a,), _backward, "sum")


def mean(a: Tensor, axis: Optional[Axes] = None) -> Tensor:
    axes = _normalize_axes(axis, a.ndim)
    count = int(np.prod([a.shape[ax] for ax in axes])) if axes else 1
    return scale(reduce_sum(a, axes), 1.0 / count)


def expand(a: Tensor, axis: int, count: int) -> Tensor:
    """Insert a new axis at ``axis`` holding ``count`` copies of ``a``."""
    if count < 1:
        raise UsageError(f"expand: count must be positive, got {count}")
    ndim_out = a.ndim + 1
    axis = axis % ndim_out
    out = np.repeat(np.expand_dims(a.data, axis), count, axis=axis)
    return make_node(out, (a,), lambda g: (g.sum(axis=axis),), "expand")


def stack(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    if not tensors:
        raise UsageError("stack: need at least one tensor")
    shape = tensors[0].shape
    for t in tensors[1:]:
        if t.shape != shape:
            raise ShapeError(f"stack: shape mismatch {shape} vs {t.shape}")
    out = np.stack([t.data for t in tensors], axis=axis)
    axis_out = axis % out.ndim

    def _backward(g: np.ndarray):
        return tuple(np.take(g, i, axis=axis_out) for i in range(len(tensors)))

    return make_node(out, tuple(tensors), _backward, "stack")


def split(a: Tensor, sections: int, axis: int = -1) -> List[Tensor]:
    """Split ``a`` into ``sections`` equal parts along ``axis``."""
    axis = axis % a.ndim
    extent = a.shape[axis]
    if sections < 1 or extent % sections:
        raise ShapeError(f"split: axis of length {extent} is not divisible into {sections} parts")
    width = extent // sections
    parts: List[Tensor] = []
    for i in range(sections):
        index = [slice(None)] * a.ndim
        index[axis] = slice(i * width, (i + 1) * width)
        key = tuple(index)

        def _backward(g: np.ndarray, key=key):
            full = np.zeros(a.shape)
            full[key] = g
            return (full,)

        parts.append(make_node(a.data[key], (a,), _backward, "split"))
    return parts


def take_last(a: Tensor, indices) -> Tensor:
    """Select one entry of the last axis per leading position."""
    idx = np.asarray(indices, dtype=np.int64)
    if idx.shape != a.shape[:-1]:
        raise ShapeError(f"take_last: indices shape {idx.shape} != {a.shape[:-1]}")
    if np.any(idx < 0) or np.any(idx >= a.shape[-1]):
        raise UsageError(f"take_last: index out of range for axis of length {a.shape[-1]}")
    gather = idx[..., None]
    out = np.take_along_axis(a.data, gather, axis=-1)[..., 0]

    def _backward(g: np.ndarray):
        full = np.zeros(a.shape)
        np.put_along_axis(full, gather, np.asarray(g)[..., None], axis=-1)
        return (full,)

    return make_node(out, (a,), _backward, "take_last")


# ---------------------------------------------------------------------------
# normalisation


def softmax(a: Tensor, axes: Axes = -1) -> Tensor:
    """Softmax over ``axes`` with max subtraction."""
    axes = _normalize_axes(axes, a.ndim)
    shifted = a.data - a.data.max(axis=axes, keepdims=True)
    e = np.exp(shifted)
    y = e / e.sum(axis=axes, keepdims=True)

    def _backward(g: np.ndarray):
        return (y * (g - (g * y).sum(axis=axes, keepdims=True)),)

    return make_node(y, (a,), _backward, "softmax")


def spatial_softmax(z: Tensor) -> Tensor:
    """Normalise an ``(..., N, N)`` score map over its two spatial axes."""
    if z.ndim < 2:
        raise ShapeError(f"spatial_softmax: expected (..., N, N), got {z.shape}")
    return softmax(z, axes=(-2, -1))


def global_norm(grads: Iterable[np.ndarray]) -> float:
    return float(np.sqrt(sum(float(np.sum(g * g)) for g in grads)))


def unstack(a: Tensor, axis: int = 0) -> List[Tensor]:
    """Split ``a`` into its slices along ``axis``, dropping that axis."""
    axis = axis % a.ndim
    shape = a.shape[:axis] + a.shape[axis + 1 :]
    return [reshape(part, shape) for part in split(a, a.shape[axis], axis=axis)]
