"""Flow encoding to images, block-matching estimation and warping."""

from __future__ import annotations

from typing import Optional

import numba
import numpy as np
from scipy import ndimage

from ..errors import ShapeError

FLOW_BOUND = 8.0


def flow_to_image(flow: np.ndarray, bound: float = FLOW_BOUND, *, quantize: bool = False) -> np.ndarray:
    """Linearly map flow in ``[-bound, bound]`` to ``[0, 255]``, clamped; zero maps to 127.5."""
    image = (np.asarray(flow, dtype=np.float64) + bound) * (255.0 / (2.0 * bound))
    image = np.clip(image, 0.0, 255.0)
    return np.round(image) if quantize else image


def image_to_flow(image: np.ndarray, bound: float = FLOW_BOUND) -> np.ndarray:
    """Inverse of :func:`flow_to_image` inside the clamp range."""
    return np.asarray(image, dtype=np.float64) * (2.0 * bound / 255.0) - bound


def _gray(frame: np.ndarray) -> np.ndarray:
    frame = np.asarray(frame, dtype=np.float64)
    return frame.mean(axis=-1) if frame.ndim == 3 else frame


def _unit_gain(gray: np.ndarray) -> np.ndarray:
    peak = gray.max()
    return gray / peak if peak > 0 else gray


@numba.njit
def _block_search(a: np.ndarray, b: np.ndarray, block: int, radius: int, margin: int) -> np.ndarray:
    # ``a`` is zero-padded by ``radius`` on every side; ``b`` is not.
    height, width = b.shape
    out = np.zeros((height, width, 2))
    for by in range(0, height, block):
        for bx in range(0, width, block):
            bh = min(block, height - by)
            bw = min(block, width - bx)
            wy0 = max(by - margin, 0)
            wy1 = min(by + bh + margin, height)
            wx0 = max(bx - margin, 0)
            wx1 = min(bx + bw + margin, width)
            best = np.inf
            best_dx = 0
            best_dy = 0
            best_d2 = 0
            for dy in range(-radius, radius + 1):
                for dx in range(-radius, radius + 1):
                    sad = 0.0
                    for y in range(wy0, wy1):
                        for x in range(wx0, wx1):
                            sad += abs(b[y, x] - a[y - dy + radius, x - dx + radius])
                    d2 = dx * dx + dy * dy
                    if sad < best or (sad == best and d2 < best_d2):
                        best = sad
                        best_dx = dx
                        best_dy = dy
                        best_d2 = d2
            for i in range(bh):
                for j in range(bw):
                    out[by + i, bx + j, 0] = best_dx
                    out[by + i, bx + j, 1] = best_dy
    return out


def block_matching_flow(
    frame_a: np.ndarray,
    frame_b: np.ndarray,
    block: int = 4,
    radius: int = 4,
    margin: Optional[int] = None,
) -> np.ndarray:
    """Per-block integer displacement of ``frame_b`` relative to ``frame_a`` by exhaustive SAD search.

    Each block is scored over a matching window that extends it by ``margin`` pixels
    (default ``block``) on every side, clipped to the frame, so that object edges next
    to a smoothly textured block pin the match down. Pixels of ``frame_a`` outside the
    frame read as zero, and both frames are scaled to a unit peak so a global change in
    brightness does not bias the match. Ties go to the smallest displacement, then to the first in
    row-major scan order.
    """
    a, b = _unit_gain(_gray(frame_a)), _unit_gain(_gray(frame_b))
    if a.shape != b.shape:
        raise ShapeError(f"block_matching_flow: frames {a.shape} and {b.shape} differ")
    margin = block if margin is None else margin
    if block < 1 or radius < 0 or margin < 0:
        raise ValueError(f"block must be >= 1, radius and margin >= 0, got {block}, {radius} and {margin}")
    padded = np.pad(a, int(radius), mode="constant")
    return _block_search(padded, np.ascontiguousarray(b), int(block), int(radius), int(margin))


def estimate_clip_flow(
    frames: np.ndarray, block: int = 4, radius: int = 4, margin: Optional[int] = None
) -> np.ndarray:
    """Block-matching flow for every adjacent frame pair; ``flow[0]`` is zero."""
    frames = np.asarray(frames)
    flow = np.zeros((*frames.shape[:3], 2), dtype=np.float64)
    for t in range(1, frames.shape[0]):
        flow[t] = block_matching_flow(frames[t - 1], frames[t], block, radius, margin)
    return flow


def warp_previous(previous: np.ndarray, flow: np.ndarray) -> np.ndarray:
    """Predict frame ``t`` by sampling frame ``t-1`` at ``p - flow_t(p)`` (bilinear)."""
    gray = _gray(previous)
    height, width = gray.shape
    rows, cols = np.mgrid[0:height, 0:width].astype(np.float64)
    coords = np.stack([rows - flow[..., 1], cols - flow[..., 0]])
    return ndimage.map_coordinates(gray, coords, order=1, mode="nearest")
