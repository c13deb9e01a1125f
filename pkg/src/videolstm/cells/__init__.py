"""One-timestep transitions of the recurrent video cells."""

from .conv import (
    apply_attention,
    conv_alstm_step,
    conv_attention,
    conv_lstm_step,
    motion_layer_step,
    videolstm_step,
)
from .params import (
    ConvCellParams,
    MotionALSTMParams,
    MotionLayerParams,
    ParamBlock,
    VectorCellParams,
    VideoLSTMParams,
    init_conv_cell,
    init_vector_cell,
)
from .state import AttentionMap, CellState
from .vector import (
    alstm_attention,
    alstm_step,
    lstm_step,
    motion_alstm_step,
    motion_vector_step,
    spatial_mean,
)

__all__ = [
    "AttentionMap",
    "CellState",
    "ConvCellParams",
    "MotionALSTMParams",
    "MotionLayerParams",
    "ParamBlock",
    "VectorCellParams",
    "VideoLSTMParams",
    "alstm_attention",
    "alstm_step",
    "apply_attention",
    "conv_alstm_step",
    "conv_attention",
    "conv_lstm_step",
    "init_conv_cell",
    "init_vector_cell",
    "lstm_step",
    "motion_alstm_step",
    "motion_layer_step",
    "motion_vector_step",
    "spatial_mean",
    "videolstm_step",
]
