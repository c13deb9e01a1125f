"""Optimisation, snippet sampling and the test-time protocol."""

from .loop import TrainResult, compute_batch_gradients, predict_clips, test_protocol, total_iterations, train
from .optimizer import RMSProp, clip_gradients, rmsprop_update
from .sampling import sample_snippet, segment_starts

__all__ = [
    "RMSProp",
    "TrainResult",
    "clip_gradients",
    "compute_batch_gradients",
    "predict_clips",
    "rmsprop_update",
    "sample_snippet",
    "segment_starts",
    "test_protocol",
    "total_iterations",
    "train",
]
