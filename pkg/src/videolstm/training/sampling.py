"""Snippet sampling for training and equally spaced segments for testing."""

from __future__ import annotations

import logging
from typing import List

import numpy as np

from ..data.clip import VideoClip
from ..errors import UsageError

_LOGGER = logging.getLogger(__name__)


def sample_snippet(clip: VideoClip, length: int, rng: np.random.Generator) -> VideoClip:
    """Contiguous window with a uniformly random start; short clips are padded with their last frame."""
    if clip.length == 0:
        raise UsageError("Cannot sample a snippet from an empty clip")
    if length < 1:
        raise UsageError(f"Snippet length must be positive, got {length}")
    if clip.length < length:
        _LOGGER.debug("Padding clip %s from %d to %d frames", clip.clip_id, clip.length, length)
        return clip.window(0, length)
    start = int(rng.integers(0, clip.length - length + 1))
    return clip.window(start, length)


def segment_starts(num_frames: int, segments: int, length: int) -> List[int]:
    """``segments`` equally spaced window starts, clamped so windows stay inside the clip when possible."""
    if num_frames < 1:
        raise UsageError("Cannot place segments in an empty clip")
    if segments < 1:
        raise UsageError(f"Need at least one segment, got {segments}")
    last = max(num_frames - length, 0)
    return [int(s) for s in np.round(np.linspace(0, last, segments)).astype(int)]
