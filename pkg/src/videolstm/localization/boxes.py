"""Box candidates from thresholded saliency and greedy frame-to-frame linking."""

from __future__ import annotations

from typing import List, Optional, Sequence

import numpy as np
from scipy import ndimage

from ..data.clip import Box

EIGHT_CONNECTED = np.ones((3, 3), dtype=bool)


def iou(a: Box, b: Box) -> float:
    """Intersection over union of two boxes."""
    inter_w = min(a.x1, b.x1) - max(a.x0, b.x0)
    inter_h = min(a.y1, b.y1) - max(a.y0, b.y0)
    if inter_w <= 0 or inter_h <= 0:
        return 0.0
    inter = inter_w * inter_h
    return inter / (a.area + b.area - inter)


def extract_boxes(saliency: np.ndarray, threshold: float) -> List[Box]:
    """Tight boxes around the 8-connected components of ``saliency >= threshold``.

    Boxes are returned sorted by ``(x0, y0, x1, y1)``.
    """
    mask = np.asarray(saliency) >= threshold
    labels, count = ndimage.label(mask, structure=EIGHT_CONNECTED)
    if count == 0:
        return []
    boxes = [
        Box(float(cols.start), float(rows.start), float(cols.stop), float(rows.stop))
        for rows, cols in ndimage.find_objects(labels)
    ]
    return sorted(boxes, key=Box.as_tuple)


def _preference(box: Box) -> tuple:
    # larger area first, then smaller (x0, y0); the far corner only separates exact duplicates
    return (box.area, -box.x0, -box.y0, -box.x1, -box.y1)


def select_box(candidates: Sequence[Box], prev: Optional[Box]) -> Optional[Box]:
    """Candidate overlapping ``prev`` best, the largest one without ``prev``, or ``prev`` when there are none."""
    if not candidates:
        return prev
    if prev is None:
        return max(candidates, key=_preference)
    return max(candidates, key=lambda box: (iou(box, prev), *_preference(box)))
