"""Classification accuracy and single-proposal localization metrics."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from ..data.clip import Box
from ..errors import ShapeError, UsageError
from ..localization.boxes import iou
from ..localization.tubes import Tube

_LOGGER = logging.getLogger(__name__)


def accuracy(predictions: np.ndarray, labels: Sequence[int]) -> float:
    """Fraction of rows whose argmax (lowest index on ties) equals the label."""
    predictions = np.asarray(predictions, dtype=np.float64)
    labels = np.asarray(labels)
    if len(labels) == 0:
        raise UsageError("Cannot compute accuracy of an empty prediction set")
    if predictions.ndim != 2 or predictions.shape[0] != len(labels):
        raise ShapeError(f"Predictions {predictions.shape} do not align with {len(labels)} labels")
    return float(np.mean(np.argmax(predictions, axis=1) == labels))


def tube_iou(tube: Sequence[Optional[Box]], gt: Sequence[Optional[Box]]) -> float:
    """Mean per-frame IoU over the frames where either side has a box; a missing side scores 0."""
    frames = max(len(tube), len(gt))
    total = 0.0
    counted = 0
    for t in range(frames):
        mine = tube[t] if t < len(tube) else None
        theirs = gt[t] if t < len(gt) else None
        if mine is None and theirs is None:
            continue
        counted += 1
        if mine is not None and theirs is not None:
            total += iou(mine, theirs)
    return total / counted if counted else 0.0


@dataclass
class GroundTruth:
    video_id: str
    label: int
    boxes: List[Optional[Box]]


@dataclass
class DetectionResult:
    """The single detection of one video."""

    video_id: str
    boxes: List[Optional[Box]]
    class_scores: np.ndarray

    @classmethod
    def from_tube(cls, tube: Tube) -> "DetectionResult":
        return cls(video_id=tube.video_id, boxes=list(tube.boxes), class_scores=np.asarray(tube.class_scores))

    def confidence(self, label: int) -> float:
        return float(self.class_scores[label])

    def to_dict(self) -> dict:
        return {
            "video_id": self.video_id,
            "class_scores": [float(score) for score in self.class_scores],
            "boxes": [box.to_dict() if box is not None else None for box in self.boxes],
        }


def voc_ap(recall: np.ndarray, precision: np.ndarray) -> float:
    """Area under the all-point interpolated precision-recall curve."""
    mrec = np.concatenate(([0.0], recall, [1.0]))
    mpre = np.concatenate(([0.0], precision, [0.0]))
    mpre = np.maximum.accumulate(mpre[::-1])[::-1]
    changes = np.where(mrec[1:] != mrec[:-1])[0]
    return float(np.sum((mrec[changes + 1] - mrec[changes]) * mpre[changes + 1]))


def average_precision(
    detections: Sequence[DetectionResult],
    gts: Sequence[GroundTruth],
    iou_threshold: float,
    *,
    label: int,
) -> Optional[float]:
    """AP of ``label``; ``None`` when no ground-truth video carries the label.

    Detections are ranked by their confidence for ``label``, ties by video id.
    """
    positives = {gt.video_id: gt for gt in gts if gt.label == label}
    if not positives:
        return None
    ranked = sorted(detections, key=lambda det: (-det.confidence(label), det.video_id))
    claimed = set()
    hits = np.zeros(len(ranked))
    for index, det in enumerate(ranked):
        gt = positives.get(det.video_id)
        if gt is None or det.video_id in claimed:
            continue
        if tube_iou(det.boxes, gt.boxes) >= iou_threshold:
            hits[index] = 1.0
            claimed.add(det.video_id)
    if not len(ranked):
        return 0.0
    tp = np.cumsum(hits)
    fp = np.cumsum(1.0 - hits)
    recall = tp / len(positives)
    precision = tp / np.maximum(tp + fp, np.finfo(np.float64).eps)
    return voc_ap(recall, precision)


def mean_average_precision(
    detections: Sequence[DetectionResult],
    gts: Sequence[GroundTruth],
    iou_threshold: float,
    num_classes: int,
) -> tuple[Optional[float], Dict[int, Optional[float]]]:
    """Arithmetic mean of the defined per-class APs, and the per-class values."""
    per_class = {
        label: average_precision(detections, gts, iou_threshold, label=label) for label in range(num_classes)
    }
    missing = [label for label, ap in per_class.items() if ap is None]
    if missing:
        _LOGGER.warning("AP undefined for classes %s (no ground truth); excluded from mAP", missing)
    defined = [ap for ap in per_class.values() if ap is not None]
    return (float(np.mean(defined)) if defined else None), per_class


def map_table(
    detections: Sequence[DetectionResult],
    gts: Sequence[GroundTruth],
    thresholds: Sequence[float],
    num_classes: int,
) -> pd.DataFrame:
    rows = []
    for threshold in thresholds:
        value, per_class = mean_average_precision(detections, gts, threshold, num_classes)
        rows.append(
            {
                "iou_threshold": float(threshold),
                "mAP": value,
                "classes": sum(ap is not None for ap in per_class.values()),
            }
        )
    return pd.DataFrame(rows, columns=["iou_threshold", "mAP", "classes"])


def recall_at_iou(
    detections: Sequence[DetectionResult],
    gts: Sequence[GroundTruth],
    thresholds: Sequence[float],
) -> pd.DataFrame:
    """Fraction of ground-truth videos whose detection reaches each IoU threshold."""
    by_video = {det.video_id: det for det in detections}
    overlaps = np.array(
        [tube_iou(by_video[gt.video_id].boxes, gt.boxes) if gt.video_id in by_video else 0.0 for gt in gts]
    )
    rows = [
        {"iou_threshold": float(threshold), "recall": float(np.mean(overlaps >= threshold)) if len(gts) else 0.0}
        for threshold in thresholds
    ]
    return pd.DataFrame(rows, columns=["iou_threshold", "recall"])


def mean_tube_iou(detections: Sequence[DetectionResult], gts: Sequence[GroundTruth]) -> float:
    """Mean tube IoU over ground-truth videos; videos without a detection count as 0."""
    if not gts:
        return 0.0
    by_video = {det.video_id: det for det in detections}
    return float(
        np.mean([tube_iou(by_video[gt.video_id].boxes, gt.boxes) if gt.video_id in by_video else 0.0 for gt in gts])
    )
