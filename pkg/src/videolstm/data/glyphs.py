"""Synthetic motion-pattern clips: one textured glyph whose trajectory defines the class."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np
from scipy import ndimage

from ..config import SyntheticDataConfig
from ..errors import ConfigurationError
from .clip import Box, VideoClip

_LOGGER = logging.getLogger(__name__)

FLICKER_LEVELS = (1.0, 0.6)
MAX_GROWTH = 0.25


class MotionProgram(str, Enum):
    """Motion patterns; their order defines the class labels."""

    HORIZONTAL_BOUNCE = "horizontal_bounce"
    VERTICAL_BOUNCE = "vertical_bounce"
    DIAGONAL = "diagonal"
    CIRCULAR = "circular"
    EXPANDING = "expanding"
    STATIC_FLICKER = "static_flicker"

    @property
    def label(self) -> int:
        return list(MotionProgram).index(self)

    @classmethod
    def from_label(cls, label: int) -> "MotionProgram":
        programs = list(cls)
        if not 0 <= label < len(programs):
            raise ConfigurationError(f"No motion program for label {label}")
        return programs[label]


class GlyphShape(str, Enum):
    SQUARE = "square"
    DISK = "disk"
    DIAMOND = "diamond"


@dataclass(frozen=True)
class GlyphSpec:
    """One glyph and the program that moves it."""

    program: MotionProgram
    shape: GlyphShape = GlyphShape.SQUARE
    size: int = 8
    intensity: float = 0.9
    speed: float = 2.0
    heading: Tuple[int, int] = (1, 1)
    start: Optional[Tuple[float, float]] = None
    clutter: float = 0.0
    noise_sigma: float = 0.0

    @property
    def label(self) -> int:
        return self.program.label


def _fold(position: float, lo: float, hi: float) -> float:
    """Reflect ``position`` into ``[lo, hi]`` (triangle wave)."""
    span = hi - lo
    if span <= 0:
        return lo
    phase = (position - lo) % (2.0 * span)
    return lo + (phase if phase <= span else 2.0 * span - phase)


def _trajectory(
    spec: GlyphSpec,
    steps: int,
    height: int,
    width: int,
    start: Tuple[float, float],
) -> List[Tuple[float, float, float]]:
    """``(cx, cy, half_size)`` of the glyph at every frame."""
    half = spec.size / 2.0
    x0, y0 = start
    sx, sy = spec.heading
    v = spec.speed
    program = spec.program
    track: List[Tuple[float, float, float]] = []
    if program == MotionProgram.CIRCULAR:
        radius = min(width, height) / 2.0 - half - 1.0
        if radius < 1.0:
            raise ConfigurationError(f"Glyph of size {spec.size} leaves no room for circular motion")
        cx0, cy0 = width / 2.0, height / 2.0
        phase = math.atan2(y0 - cy0, x0 - cx0)
        omega = sx * v / radius
        for t in range(steps):
            angle = phase + omega * t
            track.append((cx0 + radius * math.cos(angle), cy0 + radius * math.sin(angle), half))
        return track
    if program == MotionProgram.EXPANDING:
        room = min(x0, width - x0, y0, height - y0)
        growth = MAX_GROWTH * v
        if steps > 1:
            growth = min(growth, max(room - half, 0.0) / (steps - 1))
        return [(x0, y0, half + growth * t) for t in range(steps)]

    vx = vy = 0.0
    if program == MotionProgram.HORIZONTAL_BOUNCE:
        vx = sx * v
    elif program == MotionProgram.VERTICAL_BOUNCE:
        vy = sy * v
    elif program == MotionProgram.DIAGONAL:
        vx, vy = sx * v / math.sqrt(2.0), sy * v / math.sqrt(2.0)
    for t in range(steps):
        track.append(
            (
                _fold(x0 + vx * t, half, width - half),
                _fold(y0 + vy * t, half, height - half),
                half,
            )
        )
    return track


def _glyph_mask(shape: GlyphShape, dx: np.ndarray, dy: np.ndarray, half: float) -> np.ndarray:
    if shape == GlyphShape.DISK:
        return dx * dx + dy * dy < half * half
    if shape == GlyphShape.DIAMOND:
        return np.abs(dx) + np.abs(dy) < half
    return (np.abs(dx) < half) & (np.abs(dy) < half)


def _background(rng: np.random.Generator, height: int, width: int, clutter: float) -> np.ndarray:
    if clutter <= 0.0:
        return np.zeros((height, width))
    texture = ndimage.gaussian_filter(rng.random((height, width)), sigma=1.5, mode="wrap")
    spread = np.ptp(texture)
    if spread > 0:
        texture = (texture - texture.min()) / spread
    return 0.5 * clutter * texture


def _default_start(spec: GlyphSpec, rng: np.random.Generator, height: int, width: int) -> Tuple[float, float]:
    half = spec.size / 2.0
    if spec.program == MotionProgram.EXPANDING:
        return (width / 2.0 + rng.uniform(-1.0, 1.0), height / 2.0 + rng.uniform(-1.0, 1.0))
    return (rng.uniform(half, width - half), rng.uniform(half, height - half))


def generate_clip(
    spec: GlyphSpec,
    steps: int,
    height: int,
    width: int,
    rng: np.random.Generator,
    *,
    channels: int = 3,
    clip_id: str = "",
) -> VideoClip:
    """Render ``steps`` frames of ``spec`` with analytic flow and tight ground-truth boxes.

    Flow at frame ``t`` satisfies ``frame_t(p) ≈ frame_{t-1}(p - flow_t(p))`` inside
    the glyph and is zero elsewhere; ``flow[0]`` is zero.
    """
    if spec.size > min(height, width):
        raise ConfigurationError(f"Glyph of size {spec.size} does not fit a {width}×{height} frame")
    if steps < 1:
        raise ConfigurationError(f"Clip needs at least one frame, got {steps}")
    half = spec.size / 2.0
    start = spec.start if spec.start is not None else _default_start(spec, rng, height, width)
    sx0, sy0 = start
    if not (half <= sx0 <= width - half and half <= sy0 <= height - half):
        raise ConfigurationError(f"Glyph start {start} places it outside the frame")

    track = _trajectory(spec, steps, height, width, start)
    background = _background(rng, height, width, spec.clutter)
    ys, xs = np.mgrid[0:height, 0:width].astype(np.float64) + 0.5

    frames = np.zeros((steps, height, width), dtype=np.float64)
    flow = np.zeros((steps, height, width, 2), dtype=np.float64)
    boxes: List[Optional[Box]] = []
    for t, (cx, cy, size) in enumerate(track):
        dx, dy = xs - cx, ys - cy
        mask = _glyph_mask(spec.shape, dx, dy, size)
        u = dx / (2.0 * size) + 0.5
        v = dy / (2.0 * size) + 0.5
        level = FLICKER_LEVELS[t % 2] if spec.program == MotionProgram.STATIC_FLICKER else 1.0
        texture = spec.intensity * level * (0.45 + 0.35 * u + 0.2 * v)
        frame = background.copy()
        frame[mask] = texture[mask]
        if spec.noise_sigma > 0:
            frame = frame + rng.normal(0.0, spec.noise_sigma, size=frame.shape)
        frames[t] = np.clip(frame, 0.0, 1.0)

        if t > 0 and spec.program != MotionProgram.STATIC_FLICKER:
            pcx, pcy, psize = track[t - 1]
            if spec.program == MotionProgram.EXPANDING:
                shrink = 1.0 - psize / size
                flow[t, ..., 0] = np.where(mask, dx * shrink, 0.0)
                flow[t, ..., 1] = np.where(mask, dy * shrink, 0.0)
            else:
                flow[t, ..., 0] = np.where(mask, cx - pcx, 0.0)
                flow[t, ..., 1] = np.where(mask, cy - pcy, 0.0)

        rows = np.flatnonzero(mask.any(axis=1))
        cols = np.flatnonzero(mask.any(axis=0))
        if rows.size and cols.size:
            boxes.append(Box(float(cols[0]), float(rows[0]), float(cols[-1] + 1), float(rows[-1] + 1)))
        else:
            boxes.append(None)

    rgb = np.repeat(frames[..., None], channels, axis=-1)
    _LOGGER.debug("Generated %s clip %s (%d frames)", spec.program.value, clip_id or "<anon>", steps)
    return VideoClip(
        frames=rgb.astype(np.float32),
        flow=flow.astype(np.float32),
        boxes=boxes,
        label=spec.label,
        clip_id=clip_id,
        program=spec.program.value,
    )


def random_glyph_spec(program: MotionProgram, rng: np.random.Generator, cfg: SyntheticDataConfig) -> GlyphSpec:
    """Draw shape, intensity, speed and heading for one clip of ``program``."""
    shapes = list(GlyphShape)
    return GlyphSpec(
        program=program,
        shape=shapes[int(rng.integers(len(shapes)))],
        size=cfg.glyph_size,
        intensity=float(rng.uniform(0.6, 1.0)),
        speed=float(rng.uniform(cfg.min_speed, cfg.max_speed)),
        heading=(int(rng.choice([-1, 1])), int(rng.choice([-1, 1]))),
        clutter=cfg.clutter,
        noise_sigma=cfg.noise_sigma,
    )
