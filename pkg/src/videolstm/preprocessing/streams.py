"""Turn clips into normalised model inputs for the rgb and flow streams."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..config import Stream
from ..data.clip import VideoClip
from ..data.flow import flow_to_image
from ..errors import ShapeError, UsageError


@dataclass
class StreamBatch:
    """Stacked inputs of equal-length clips."""

    inputs: np.ndarray
    flow: Optional[np.ndarray]
    labels: np.ndarray

    @property
    def size(self) -> int:
        return self.inputs.shape[0]


def normalize_frames(frames: np.ndarray) -> np.ndarray:
    """Map [0, 1] intensities to [-0.5, 0.5]."""
    return np.asarray(frames, dtype=np.float64) - 0.5


def normalize_flow(flow: np.ndarray) -> np.ndarray:
    """Flow image in [0, 255] rescaled to [-0.5, 0.5]."""
    return flow_to_image(flow) / 255.0 - 0.5


def stream_inputs(clip: VideoClip, stream: Stream) -> np.ndarray:
    if Stream(stream) == Stream.FLOW:
        return normalize_flow(clip.flow)
    return normalize_frames(clip.frames)


def prepare_batch(clips: Sequence[VideoClip], stream: Stream, *, with_flow: bool = False) -> StreamBatch:
    """Stack ``clips`` into ``(B, T, H, W, C)`` stream inputs and optional flow images."""
    if not clips:
        raise UsageError("prepare_batch needs at least one clip")
    shape = clips[0].frames.shape[:3]
    for clip in clips[1:]:
        if clip.frames.shape[:3] != shape:
            raise ShapeError(f"Clips differ in extent: {clip.frames.shape[:3]} vs {shape}")
    inputs = np.stack([stream_inputs(clip, stream) for clip in clips])
    flow = np.stack([normalize_flow(clip.flow) for clip in clips]) if with_flow else None
    labels = np.array([clip.label for clip in clips], dtype=np.int64)
    return StreamBatch(inputs=inputs, flow=flow, labels=labels)
