"""Input preparation for the two streams."""

from .streams import StreamBatch, normalize_flow, normalize_frames, prepare_batch, stream_inputs

__all__ = ["StreamBatch", "normalize_flow", "normalize_frames", "prepare_batch", "stream_inputs"]
