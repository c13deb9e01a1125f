"""Accuracy, tube IoU, recall curves and mAP."""

from .metrics import (
    DetectionResult,
    GroundTruth,
    accuracy,
    average_precision,
    map_table,
    mean_average_precision,
    mean_tube_iou,
    recall_at_iou,
    tube_iou,
    voc_ap,
)
from .report import EvalReport, format_table

__all__ = [
    "DetectionResult",
    "EvalReport",
    "GroundTruth",
    "accuracy",
    "average_precision",
    "format_table",
    "map_table",
    "mean_average_precision",
    "mean_tube_iou",
    "recall_at_iou",
    "tube_iou",
    "voc_ap",
]
