"""End-to-end video classifier: encoders, unrolled recurrent cell and classifier head."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np

from .. import autodiff as ad
from ..autodiff import Tensor, constant
from ..cells import (
    AttentionMap,
    CellState,
    ConvCellParams,
    MotionALSTMParams,
    ParamBlock,
    VectorCellParams,
    VideoLSTMParams,
    alstm_step,
    conv_alstm_step,
    conv_lstm_step,
    init_conv_cell,
    init_vector_cell,
    lstm_step,
    motion_alstm_step,
    spatial_mean,
    videolstm_step,
)
from ..config import CellVariant, ModelConfig, Stream
from ..errors import ShapeError, UsageError
from .encoder import EncoderParams, encode_frame, init_encoder
from .predictions import FramePrediction, HeadParams, classify_hidden, cross_entropy_loss, init_head, video_prediction

_LOGGER = logging.getLogger(__name__)

FLOW_CHANNELS = 2

_CELL_BLOCKS: Dict[CellVariant, Optional[type]] = {
    CellVariant.CONVNET: None,
    CellVariant.LSTM: VectorCellParams,
    CellVariant.ALSTM: VectorCellParams,
    CellVariant.MOTION_ALSTM: MotionALSTMParams,
    CellVariant.CONV_LSTM: ConvCellParams,
    CellVariant.CONV_ALSTM: ConvCellParams,
    CellVariant.VIDEOLSTM: VideoLSTMParams,
}


@dataclass
class SequenceOutput:
    """Per-frame predictions of a batch of sequences."""

    predictions: List[FramePrediction]
    attention: List[AttentionMap] = field(default_factory=list)

    def video_prob(self) -> Tensor:
        return video_prediction(self.predictions)

    def frame_probs(self) -> np.ndarray:
        """``(B, T, classes)`` per-frame probabilities."""
        return np.stack([p.probs.data for p in self.predictions], axis=1)

    def attention_weights(self) -> Optional[np.ndarray]:
        """``(B, T, N, N)`` attention maps, or ``None`` for variants without attention."""
        if not self.attention:
            return None
        return np.stack([a.weights.data for a in self.attention], axis=1)


def _modalities(variant: CellVariant, stream: Stream) -> Tuple[str, ...]:
    names = [stream.value]
    if variant.uses_motion and stream != Stream.FLOW:
        names.append(Stream.FLOW.value)
    return tuple(names)


class VideoModel:
    """Parameters and forward pass of one variant for one input stream."""

    def __init__(
        self,
        config: ModelConfig,
        stream: Stream,
        encoders: Mapping[str, EncoderParams],
        cell: Optional[ParamBlock],
        head: HeadParams,
    ) -> None:
        self.config = config
        self.stream = Stream(stream)
        self.encoders = dict(encoders)
        self.cell = cell
        self.head = head
        for key, tensor in self.named_parameters().items():
            tensor.name = key

    # ------------------------------------------------------------------
    # construction

    @classmethod
    def initialize(cls, config: ModelConfig, stream: Stream = Stream.RGB, seed: int = 0) -> "VideoModel":
        rng = np.random.default_rng(seed)
        variant = config.variant
        d, k = config.feature_channels, config.hidden_channels
        encoders = {}
        for name in _modalities(variant, Stream(stream)):
            channels = config.frame_channels if name == Stream.RGB.value else FLOW_CHANNELS
            encoders[name] = init_encoder(rng, channels, config.encoder_channels, d)

        cell: Optional[ParamBlock]
        if variant == CellVariant.CONVNET:
            cell = None
        elif variant == CellVariant.LSTM:
            cell = init_vector_cell(rng, d, k)
        elif variant == CellVariant.ALSTM:
            cell = init_vector_cell(rng, d, k, attention=True)
        elif variant == CellVariant.MOTION_ALSTM:
            cell = MotionALSTMParams(
                bottom=init_vector_cell(rng, d, k, top_down=True),
                top=init_vector_cell(rng, d, k, attention=True),
            )
        elif variant == CellVariant.CONV_LSTM:
            cell = init_conv_cell(rng, d, k, kernel=config.state_kernel)
        elif variant == CellVariant.CONV_ALSTM:
            cell = init_conv_cell(
                rng, d, k, kernel=config.state_kernel, attention=True, attention_kernel=config.attention_kernel
            )
        else:
            cell = VideoLSTMParams(
                bottom=init_conv_cell(rng, d, k, kernel=config.state_kernel, top_down=True),
                top=init_conv_cell(
                    rng, d, k, kernel=config.state_kernel, attention=True, attention_kernel=config.attention_kernel
                ),
            )
        head = init_head(rng, cls.head_input_dim(config), config.head_width, config.num_classes)
        _LOGGER.debug("Initialised %s/%s model with seed %d", variant.value, Stream(stream).value, seed)
        return cls(config, stream, encoders, cell, head)

    @classmethod
    def from_arrays(cls, config: ModelConfig, stream: Stream, arrays: Mapping[str, np.ndarray]) -> "VideoModel":
        encoders = {
            name: EncoderParams.from_arrays(arrays, f"encoder.{name}.")
            for name in _modalities(config.variant, Stream(stream))
        }
        block = _CELL_BLOCKS[config.variant]
        cell = block.from_arrays(arrays, "cell.") if block is not None else None
        head = HeadParams.from_arrays(arrays, "head.")
        model = cls(config, stream, encoders, cell, head)
        expected = set(model.named_parameters())
        unexpected = sorted(set(arrays) - expected)
        if unexpected:
            raise ShapeError(f"Parameters not used by a {config.variant.value} model: {unexpected}")
        return model

    @staticmethod
    def head_input_dim(config: ModelConfig) -> int:
        n = config.grid_size
        if config.variant == CellVariant.CONVNET:
            return n * n * config.feature_channels
        if config.variant.is_convolutional:
            return n * n * config.hidden_channels
        return config.hidden_channels

    def replicate(self) -> "VideoModel":
        """Independent leaf tensors holding copies of the current values."""
        return VideoModel.from_arrays(self.config, self.stream, self.state_arrays())

    # ------------------------------------------------------------------
    # parameters

    def named_parameters(self) -> Dict[str, Tensor]:
        params: Dict[str, Tensor] = {}
        for name in sorted(self.encoders):
            params.update(self.encoders[name].named_tensors(f"encoder.{name}."))
        if self.cell is not None:
            params.update(self.cell.named_tensors("cell."))
        params.update(self.head.named_tensors("head."))
        return params

    def state_arrays(self) -> Dict[str, np.ndarray]:
        return {key: tensor.data.copy() for key, tensor in self.named_parameters().items()}

    def load_arrays(self, arrays: Mapping[str, np.ndarray]) -> None:
        for key, tensor in self.named_parameters().items():
            if key not in arrays:
                raise ShapeError(f"Missing parameter '{key}'")
            value = np.asarray(arrays[key], dtype=np.float64)
            if value.shape != tensor.shape:
                raise ShapeError(f"Parameter '{key}' has shape {value.shape}, expected {tensor.shape}")
            tensor.data = value.copy()

    @property
    def variant(self) -> CellVariant:
        return self.config.variant

    @property
    def num_classes(self) -> int:
        return self.config.num_classes

    @property
    def requires_flow(self) -> bool:
        return self.variant.uses_motion

    @property
    def needs_flow_input(self) -> bool:
        """Whether flow must be supplied next to the stream inputs."""
        return self.requires_flow and self.stream != Stream.FLOW

    # ------------------------------------------------------------------
    # forward

    def forward_sequence(
        self,
        frames: np.ndarray,
        flow: Optional[np.ndarray] = None,
        *,
        dropout: Optional[np.ndarray] = None,
    ) -> SequenceOutput:
        """Unroll the model over ``(B, T, H, W, C)`` stream inputs from zero initial states.

        ``flow`` holds the normalised flow images that feed the motion layer of
        motion-attention variants; ``dropout`` is a ``(B, T, head_width)`` mask
        applied only during training.
        """
        frames = np.asarray(frames, dtype=np.float64)
        if frames.ndim == 4:
            frames = frames[None]
            flow = None if flow is None else np.asarray(flow)[None]
        if frames.ndim != 5:
            raise ShapeError(f"forward_sequence: expected (B, T, H, W, C) inputs, got {frames.shape}")
        batch, steps = frames.shape[:2]
        if steps < 1:
            raise UsageError("forward_sequence needs at least one frame")
        if self.requires_flow and self.stream != Stream.FLOW:
            if flow is None:
                raise UsageError(f"Variant '{self.variant.value}' needs flow input for its motion layer")
            if flow.shape[:2] != frames.shape[:2]:
                raise UsageError(
                    f"Frame and flow sequences differ in length: {frames.shape[:2]} vs {np.shape(flow)[:2]}"
                )
        if dropout is not None and dropout.shape != (batch, steps, self.head.width):
            raise ShapeError(f"dropout mask {dropout.shape} != {(batch, steps, self.head.width)}")

        features = encode_frame(constant(frames), self.encoders[self.stream.value])
        xs = ad.unstack(features, axis=1)
        ms: List[Tensor] = []
        if self.requires_flow:
            if self.stream == Stream.FLOW:
                ms = xs
            else:
                motion = encode_frame(constant(np.asarray(flow, dtype=np.float64)), self.encoders[Stream.FLOW.value])
                ms = ad.unstack(motion, axis=1)

        n, d = features.shape[-2], features.shape[-1]
        k = self.config.hidden_channels
        variant = self.variant
        if variant.is_convolutional:
            state_shape: Tuple[int, ...] = (batch, n, n, k)
        else:
            state_shape = (batch, k)
        state = CellState.zeros(state_shape)
        bottom = CellState.zeros(state_shape)
        feature_axes = 3 if (variant.is_convolutional or variant == CellVariant.CONVNET) else 1

        output = SequenceOutput(predictions=[])
        for t in range(steps):
            X = xs[t]
            attention: Optional[AttentionMap] = None
            if variant == CellVariant.CONVNET:
                hidden = X
            elif variant == CellVariant.LSTM:
                state = lstm_step(spatial_mean(X), state, self.cell)
                hidden = state.h
            elif variant == CellVariant.ALSTM:
                state, attention = alstm_step(X, state, self.cell, return_attention=True)
                hidden = state.h
            elif variant == CellVariant.MOTION_ALSTM:
                state, bottom, attention = motion_alstm_step(
                    X, spatial_mean(ms[t]), state, bottom, self.cell.top, self.cell.bottom
                )
                hidden = state.h
            elif variant == CellVariant.CONV_LSTM:
                state = conv_lstm_step(X, state, self.cell)
                hidden = state.h
            elif variant == CellVariant.CONV_ALSTM:
                state, attention = conv_alstm_step(X, state, self.cell)
                hidden = state.h
            else:
                state, bottom, attention = videolstm_step(X, ms[t], state, bottom, state.h, self.cell)
                hidden = state.h
            mask = None if dropout is None else dropout[:, t]
            prediction = classify_hidden(hidden, self.head, mask, feature_axes=feature_axes)
            prediction.attention = attention
            output.predictions.append(prediction)
            if attention is not None:
                output.attention.append(attention)
        _LOGGER.debug("Forward %s over batch %d × %d frames (N=%d, D=%d)", variant.value, batch, steps, n, d)
        return output

    def loss(
        self,
        frames: np.ndarray,
        flow: Optional[np.ndarray],
        labels,
        *,
        dropout: Optional[np.ndarray] = None,
    ) -> Tuple[Tensor, Tensor]:
        """Cross-entropy of the temporally aggregated prediction; returns ``(loss, video_prob)``."""
        output = self.forward_sequence(frames, flow, dropout=dropout)
        video_prob = output.video_prob()
        return cross_entropy_loss(video_prob, labels), video_prob

    def predict(self, frames: np.ndarray, flow: Optional[np.ndarray] = None) -> np.ndarray:
        """Inference-mode ``(B, classes)`` video distributions."""
        return self.forward_sequence(frames, flow).video_prob().numpy()
