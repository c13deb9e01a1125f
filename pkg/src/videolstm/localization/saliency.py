"""Attention maps to frame-sized saliency maps, plus PGM export."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import List, Optional

import numpy as np
from scipy import ndimage

from ..errors import FormatError, ShapeError, UsageError

_LOGGER = logging.getLogger(__name__)

SALIENCY_PEAK = 255.0


def _check_attention(attention: np.ndarray, height: int, width: int) -> np.ndarray:
    attention = np.asarray(attention, dtype=np.float64)
    if attention.ndim != 2 or attention.shape[0] != attention.shape[1]:
        raise ShapeError(f"Attention map must be N×N, got {attention.shape}")
    grid = attention.shape[0]
    if height < grid or width < grid:
        raise UsageError(f"Frame {height}×{width} is smaller than the {grid}×{grid} attention grid")
    return attention


def upscale_attention(attention: np.ndarray, height: int, width: int) -> np.ndarray:
    """Bilinear upscale with cell centres aligned to their pixel footprints."""
    attention = _check_attention(attention, height, width)
    grid = attention.shape[0]
    rows = (np.arange(height) + 0.5) * grid / height - 0.5
    cols = (np.arange(width) + 0.5) * grid / width - 0.5
    coords = np.meshgrid(rows, cols, indexing="ij")
    return ndimage.map_coordinates(attention, coords, order=1, mode="nearest")


def raw_saliency(attention: np.ndarray, height: int, width: int, sigma: float) -> np.ndarray:
    """Upscaled and blurred attention, before rescaling."""
    if sigma <= 0:
        raise UsageError(f"Gaussian sigma must be positive, got {sigma}")
    return ndimage.gaussian_filter(upscale_attention(attention, height, width), sigma=sigma, mode="reflect")


def rescale_saliency(maps: np.ndarray, peak: Optional[float] = None) -> np.ndarray:
    """Map ``maps`` linearly so that ``peak`` (their maximum by default) becomes 255."""
    maps = np.asarray(maps, dtype=np.float64)
    if peak is None:
        peak = float(maps.max()) if maps.size else 0.0
    if peak <= 0.0:
        return np.zeros_like(maps)
    return maps * (SALIENCY_PEAK / peak)


def saliency_from_attention(
    attention: np.ndarray,
    height: int,
    width: int,
    sigma: float,
    peak: Optional[float] = None,
) -> np.ndarray:
    """Saliency map of a single frame; without ``peak`` the frame's own maximum maps to 255."""
    return rescale_saliency(raw_saliency(attention, height, width, sigma), peak)


def video_saliency(attention: np.ndarray, height: int, width: int, sigma: float) -> np.ndarray:
    """``(T, H, W)`` saliency with one scale for the whole video: the maximum over all frames maps to 255."""
    attention = np.asarray(attention, dtype=np.float64)
    if attention.ndim != 3:
        raise ShapeError(f"Video attention must be (T, N, N), got {attention.shape}")
    raw = np.stack([raw_saliency(frame, height, width, sigma) for frame in attention])
    return rescale_saliency(raw)


def saliency_to_pgm(saliency: np.ndarray) -> bytes:
    """Binary 8-bit PGM (P5) encoding of one saliency map."""
    saliency = np.asarray(saliency)
    if saliency.ndim != 2:
        raise ShapeError(f"Saliency map must be 2-d, got {saliency.shape}")
    height, width = saliency.shape
    pixels = np.clip(np.round(saliency), 0, 255).astype(np.uint8)
    return f"P5\n{width} {height}\n255\n".encode("ascii") + pixels.tobytes()


def pgm_to_array(payload: bytes) -> np.ndarray:
    parts = payload.split(b"\n", 3)
    if len(parts) != 4 or parts[0] != b"P5":
        raise FormatError("Not a binary PGM (P5) image")
    try:
        width, height = (int(value) for value in parts[1].split())
        maxval = int(parts[2])
    except ValueError as exc:
        raise FormatError(f"Malformed PGM header: {exc}") from exc
    if maxval != 255:
        raise FormatError(f"Only 8-bit PGM is supported, found maxval {maxval}")
    if len(parts[3]) != width * height:
        raise FormatError(f"PGM payload has {len(parts[3])} bytes, expected {width * height}")
    return np.frombuffer(parts[3], dtype=np.uint8).reshape(height, width)


def export_saliency(out_dir: Path, video_id: str, saliency: np.ndarray) -> List[Path]:
    """Write one ``<video_id>_<t>.pgm`` per frame of a ``(T, H, W)`` saliency stack."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for index, frame in enumerate(saliency):
        path = out_dir / f"{video_id}_{index:03d}.pgm"
        path.write_bytes(saliency_to_pgm(frame))
        paths.append(path)
    _LOGGER.debug("Wrote %d saliency maps for %s to %s", len(paths), video_id, out_dir)
    return paths
