"""Small trainable convolutional encoder turning frames into ``N×N×D`` feature maps."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import autodiff as ad
from ..autodiff import Tensor, parameter
from ..cells.params import ParamBlock, glorot_uniform
from ..config import ENCODER_STRIDE
from ..errors import ConfigurationError, ShapeError

ENCODER_KERNEL = 3


@dataclass
class EncoderParams(ParamBlock):
    """Two ``3×3`` convolutions, each followed by tanh and ``2×2`` max pooling."""

    w1: Tensor
    b1: Tensor
    w2: Tensor
    b2: Tensor

    @property
    def in_channels(self) -> int:
        return self.w1.shape[2]

    @property
    def out_channels(self) -> int:
        return self.w2.shape[3]


def init_encoder(rng: np.random.Generator, in_channels: int, mid_channels: int, out_channels: int) -> EncoderParams:
    k = ENCODER_KERNEL
    return EncoderParams(
        w1=glorot_uniform(rng, (k, k, in_channels, mid_channels), k * k * in_channels, k * k * mid_channels, "w1"),
        b1=parameter(np.zeros(mid_channels), name="b1"),
        w2=glorot_uniform(rng, (k, k, mid_channels, out_channels), k * k * mid_channels, k * k * out_channels, "w2"),
        b2=parameter(np.zeros(out_channels), name="b2"),
    )


def encode_frame(frame: Tensor, params: EncoderParams) -> Tensor:
    """Map ``(..., H, W, C)`` frames to ``(..., H/4, W/4, D)`` feature maps."""
    if frame.ndim < 3:
        raise ShapeError(f"encode_frame: expected (..., H, W, C), got {frame.shape}")
    h, w, c = frame.shape[-3:]
    if h % ENCODER_STRIDE or w % ENCODER_STRIDE:
        raise ConfigurationError(
            f"Frame extents {h}×{w} are not divisible by the encoder stride {ENCODER_STRIDE}"
        )
    if c != params.in_channels:
        raise ShapeError(f"encode_frame: frame has {c} channels, encoder expects {params.in_channels}")
    hidden = ad.max_pool2d(ad.tanh(ad.conv2d(frame, params.w1, params.b1)), 2)
    return ad.max_pool2d(ad.tanh(ad.conv2d(hidden, params.w2, params.b2)), 2)
