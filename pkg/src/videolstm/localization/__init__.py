"""Attention-based spatio-temporal localization."""

from .boxes import extract_boxes, iou, select_box
from .saliency import (
    export_saliency,
    pgm_to_array,
    raw_saliency,
    rescale_saliency,
    saliency_from_attention,
    saliency_to_pgm,
    upscale_attention,
    video_saliency,
)
from .tubes import Localization, Tube, build_tube, chain_boxes, localize_video, read_tubes, smooth_tube, write_tubes

__all__ = [
    "Localization",
    "Tube",
    "build_tube",
    "chain_boxes",
    "export_saliency",
    "extract_boxes",
    "iou",
    "localize_video",
    "pgm_to_array",
    "raw_saliency",
    "read_tubes",
    "rescale_saliency",
    "saliency_from_attention",
    "saliency_to_pgm",
    "select_box",
    "smooth_tube",
    "upscale_attention",
    "video_saliency",
    "write_tubes",
]
