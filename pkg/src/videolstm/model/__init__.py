"""Frame encoder, unrolled classifier, loss, fusion and checkpoints."""

from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint, transfer_parameters
from .encoder import EncoderParams, encode_frame, init_encoder
from .network import SequenceOutput, VideoModel
from .predictions import (
    FramePrediction,
    HeadParams,
    classify_hidden,
    cross_entropy_loss,
    dropout_mask,
    fuse_streams,
    init_head,
    video_prediction,
)

__all__ = [
    "Checkpoint",
    "EncoderParams",
    "FramePrediction",
    "HeadParams",
    "SequenceOutput",
    "VideoModel",
    "classify_hidden",
    "cross_entropy_loss",
    "dropout_mask",
    "encode_frame",
    "fuse_streams",
    "init_encoder",
    "init_head",
    "load_checkpoint",
    "save_checkpoint",
    "transfer_parameters",
    "video_prediction",
]
