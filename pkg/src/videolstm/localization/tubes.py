"""Single-proposal action tubes: box chaining, temporal smoothing and scoring."""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..config import LocalizationConfig
from ..data.clip import Box
from ..errors import EmptyTubeError, ShapeError
from .boxes import extract_boxes, select_box
from .saliency import video_saliency

_LOGGER = logging.getLogger(__name__)


@dataclass
class Tube:
    """One box per frame plus a per-class confidence."""

    video_id: str
    boxes: List[Box]
    class_scores: np.ndarray
    smoothed: bool = False

    @property
    def length(self) -> int:
        return len(self.boxes)

    @property
    def label(self) -> int:
        return int(np.argmax(self.class_scores))

    def to_dict(self) -> dict:
        return {
            "video_id": self.video_id,
            "label": self.label,
            "smoothed": self.smoothed,
            "class_scores": [float(score) for score in self.class_scores],
            "boxes": [box.to_dict() for box in self.boxes],
        }


@dataclass
class Localization:
    """Tube of one video, with and without smoothing, and the saliency it came from."""

    tube: Tube
    raw_tube: Tube
    saliency: np.ndarray = field(repr=False)
    selected_frames: int = 0


def _tricube(distance: np.ndarray, bandwidth: float) -> np.ndarray:
    ratio = np.clip(distance / bandwidth, 0.0, 1.0)
    return (1.0 - ratio**3) ** 3


def _local_linear(values: np.ndarray, span: float) -> np.ndarray:
    count = len(values)
    neighbours = min(count, max(3, math.ceil(span * count)))
    times = np.arange(count, dtype=np.float64)
    fitted = np.empty(count)
    for t in range(count):
        distance = np.abs(times - t)
        nearest = np.argsort(distance, kind="stable")[:neighbours]
        weights = _tricube(distance[nearest], distance[nearest].max() + 1.0)
        root = np.sqrt(weights)
        design = np.column_stack([np.ones(neighbours), times[nearest] - t]) * root[:, None]
        coef, *_ = np.linalg.lstsq(design, values[nearest] * root, rcond=None)
        fitted[t] = coef[0]
    return fitted


def smooth_tube(
    boxes: Sequence[Box],
    span: float = 0.3,
    bounds: Optional[Tuple[float, float]] = None,
) -> List[Box]:
    """Smooth centre and size over time with tricube-weighted local linear fits.

    ``bounds`` is ``(width, height)``; smoothed boxes are shifted and shrunk to fit inside it.
    """
    boxes = list(boxes)
    if len(boxes) < 2:
        return boxes
    params = np.array([(*box.center, box.width, box.height) for box in boxes], dtype=np.float64)
    fitted = np.column_stack([_local_linear(params[:, k], span) for k in range(4)])
    smoothed = []
    for cx, cy, width, height in fitted:
        width = max(width, 1.0)
        height = max(height, 1.0)
        if bounds is not None:
            frame_w, frame_h = bounds
            width = min(width, frame_w)
            height = min(height, frame_h)
            cx = min(max(cx, 0.5 * width), frame_w - 0.5 * width)
            cy = min(max(cy, 0.5 * height), frame_h - 0.5 * height)
        smoothed.append(Box.from_center(cx, cy, width, height))
    return smoothed


def chain_boxes(saliency: np.ndarray, threshold: float) -> List[Optional[Box]]:
    """Greedy per-frame selection; frames without candidates carry the previous box."""
    chain: List[Optional[Box]] = []
    prev: Optional[Box] = None
    for frame in saliency:
        prev = select_box(extract_boxes(frame, threshold), prev)
        chain.append(prev)
    return chain


def localize_video(
    attention: np.ndarray,
    frame_probs: np.ndarray,
    cfg: LocalizationConfig,
    frame_size: Tuple[int, int],
    video_id: str = "",
) -> Localization:
    """Attention ``(T, N, N)`` and frame distributions ``(T, C)`` to a single tube.

    Raises :class:`EmptyTubeError` when no frame yields a box.
    """
    attention = np.asarray(attention, dtype=np.float64)
    frame_probs = np.asarray(frame_probs, dtype=np.float64)
    if attention.ndim != 3 or frame_probs.ndim != 2 or len(attention) != len(frame_probs):
        raise ShapeError(f"Attention {attention.shape} and frame predictions {frame_probs.shape} are not aligned")
    height, width = frame_size
    saliency = video_saliency(attention, height, width, cfg.resolved_sigma(height))
    chain = chain_boxes(saliency, cfg.threshold)
    first = next((box for box in chain if box is not None), None)
    if first is None:
        raise EmptyTubeError(f"No saliency component reaches {cfg.threshold} in any frame of '{video_id}'")
    selected = sum(box is not None for box in chain)
    boxes = [box if box is not None else first for box in chain]
    scores = frame_probs.mean(axis=0)
    raw_tube = Tube(video_id=video_id, boxes=boxes, class_scores=scores)
    if cfg.smooth:
        tube = Tube(
            video_id=video_id,
            boxes=smooth_tube(boxes, cfg.span, bounds=(width, height)),
            class_scores=scores,
            smoothed=True,
        )
    else:
        tube = raw_tube
    _LOGGER.debug("Tube for %s: %d/%d frames with candidates", video_id, selected, len(chain))
    return Localization(tube=tube, raw_tube=raw_tube, saliency=saliency, selected_frames=selected)


def build_tube(
    attention: np.ndarray,
    frame_probs: np.ndarray,
    cfg: LocalizationConfig,
    frame_size: Tuple[int, int],
    video_id: str = "",
) -> Tube:
    return localize_video(attention, frame_probs, cfg, frame_size, video_id).tube


def write_tubes(path: Path, tubes: Sequence[Tube], failures: Sequence[dict] = ()) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {"tubes": [tube.to_dict() for tube in tubes], "failures": list(failures)}
    path.write_text(json.dumps(payload, indent=2))
    return path


def read_tubes(path: Path) -> List[Tube]:
    payload = json.loads(Path(path).read_text())
    return [
        Tube(
            video_id=item["video_id"],
            boxes=[Box.from_dict(box) for box in item["boxes"]],
            class_scores=np.asarray(item["class_scores"], dtype=np.float64),
            smoothed=bool(item.get("smoothed", False)),
        )
        for item in payload["tubes"]
    ]
