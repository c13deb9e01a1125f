"""Classifier head, temporal aggregation, loss and two-stream fusion."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .. import autodiff as ad
from ..autodiff import Tensor, constant, parameter
from ..cells.params import ParamBlock, glorot_uniform
from ..cells.state import AttentionMap
from ..errors import DegenerateFusionError, ShapeError, UsageError

PROB_FLOOR = 1e-12


@dataclass
class HeadParams(ParamBlock):
    """Hidden layer of ``head_width`` tanh units followed by the class layer."""

    w1: Tensor
    b1: Tensor
    w2: Tensor
    b2: Tensor

    @property
    def input_dim(self) -> int:
        return self.w1.shape[0]

    @property
    def width(self) -> int:
        return self.w1.shape[1]

    @property
    def num_classes(self) -> int:
        return self.w2.shape[1]


def init_head(rng: np.random.Generator, input_dim: int, width: int, num_classes: int) -> HeadParams:
    return HeadParams(
        w1=glorot_uniform(rng, (input_dim, width), input_dim, width, "w1"),
        b1=parameter(np.zeros(width), name="b1"),
        w2=glorot_uniform(rng, (width, num_classes), width, num_classes, "w2"),
        b2=parameter(np.zeros(num_classes), name="b2"),
    )


@dataclass
class FramePrediction:
    """Per-frame class scores and their softmax, with the attention used at that frame."""

    scores: Tensor
    probs: Tensor
    attention: Optional[AttentionMap] = None

    def numpy(self) -> np.ndarray:
        return self.probs.numpy()


def dropout_mask(rng: np.random.Generator, shape, rate: float) -> np.ndarray:
    """Inverted-dropout mask: zeros with probability ``rate``, survivors scaled by ``1/(1-rate)``."""
    if not 0.0 <= rate < 1.0:
        raise UsageError(f"dropout rate must lie in [0, 1), got {rate}")
    keep = rng.random(shape) >= rate
    return keep / (1.0 - rate)


def classify_hidden(
    H: Tensor,
    params: HeadParams,
    dropout: Optional[np.ndarray] = None,
    *,
    feature_axes: int = 1,
) -> FramePrediction:
    """dense → tanh → dropout (training only) → dense → softmax.

    The trailing ``feature_axes`` axes of ``H`` are flattened into the head input.
    """
    lead = H.shape[: H.ndim - feature_axes]
    flat = ad.reshape(H, (*lead, -1)) if feature_axes != 1 else H
    if flat.shape[-1] != params.input_dim:
        raise ShapeError(f"classify_hidden: {flat.shape[-1]} features, head expects {params.input_dim}")
    hidden = ad.tanh(ad.dense(flat, params.w1, params.b1))
    if dropout is not None:
        if dropout.shape != hidden.shape:
            raise ShapeError(f"classify_hidden: dropout mask {dropout.shape} != {hidden.shape}")
        hidden = hidden * constant(dropout)
    scores = ad.dense(hidden, params.w2, params.b2)
    return FramePrediction(scores=scores, probs=ad.softmax(scores, axes=-1))


def video_prediction(frame_preds: Sequence[FramePrediction]) -> Tensor:
    """Sum of per-frame probabilities over time, renormalised."""
    if not frame_preds:
        raise UsageError("video_prediction needs at least one frame prediction")
    if len(frame_preds) == 1:
        return frame_preds[0].probs
    total = ad.reduce_sum(ad.stack([p.probs for p in frame_preds], axis=0), axis=0)
    return ad.scale(total, 1.0 / len(frame_preds))


def cross_entropy_loss(video_prob: Tensor, label) -> Tensor:
    """Mean over the batch of ``-log p(label)``, with ``p`` clamped at 1e-12."""
    labels = np.asarray(label, dtype=np.int64)
    picked = ad.take_last(video_prob, labels)
    nll = -ad.log_clamped(picked, PROB_FLOOR)
    return ad.mean(nll) if nll.ndim else nll


def fuse_streams(p_rgb: np.ndarray, p_flow: np.ndarray) -> np.ndarray:
    """Renormalised entrywise product of two class distributions (last axis)."""
    p_rgb = np.asarray(p_rgb, dtype=np.float64)
    p_flow = np.asarray(p_flow, dtype=np.float64)
    if p_rgb.shape != p_flow.shape:
        raise ShapeError(f"fuse_streams: distributions {p_rgb.shape} and {p_flow.shape} differ")
    product = p_rgb * p_flow
    total = product.sum(axis=-1, keepdims=True)
    if np.any(total <= 0.0):
        raise DegenerateFusionError("Product fusion assigns zero probability to every class")
    return product / total
