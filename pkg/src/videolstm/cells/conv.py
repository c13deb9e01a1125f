"""Convolutional cells: ConvLSTM, ConvALSTM and the two-layer motion-attention VideoLSTM."""

from __future__ import annotations

from typing import Optional, Tuple

from .. import autodiff as ad
from ..autodiff import Tensor
from ..errors import ShapeError, UsageError
from .params import ConvCellParams, MotionLayerParams, VideoLSTMParams
from .state import AttentionMap, CellState, gate_update


def _check_map(X: Tensor, what: str) -> None:
    if X.ndim < 3:
        raise ShapeError(f"{what}: expected an (..., N, N, C) map, got {X.shape}")


def _check_state(X: Tensor, state: CellState, hidden: int, what: str) -> None:
    expected = (*X.shape[:-1], hidden)
    if state.shape != expected:
        raise ShapeError(f"{what}: state {state.shape} does not match expected {expected}")


def conv_lstm_step(X: Tensor, state: CellState, params: ConvCellParams) -> CellState:
    """One ConvLSTM transition; the state keeps the ``N×N×K`` layout of ``X``."""
    _check_map(X, "conv_lstm_step")
    _check_state(X, state, params.hidden_channels, "conv_lstm_step")
    z = ad.conv2d(X, params.w_x, params.b) + ad.conv2d(state.h, params.w_h)
    return gate_update(z, state)


def conv_attention(X: Tensor, H_cond: Tensor, params: ConvCellParams) -> AttentionMap:
    """``softmax_ij(W_z * tanh(W_xa * X + W_ha * H_cond + b_a))``."""
    if not params.has_attention:
        raise UsageError("conv_attention needs attention kernels")
    _check_map(X, "conv_attention")
    _check_map(H_cond, "conv_attention")
    if X.shape[:-1] != H_cond.shape[:-1]:
        raise ShapeError(f"conv_attention: spatial extents differ, {X.shape} vs {H_cond.shape}")
    hidden = ad.tanh(ad.conv2d(X, params.w_xa, params.b_a) + ad.conv2d(H_cond, params.w_ha))
    scores = ad.conv2d(hidden, params.w_z)
    logits = ad.reshape(scores, scores.shape[:-1])
    return AttentionMap(weights=ad.spatial_softmax(logits), logits=logits)


def apply_attention(A: AttentionMap, X: Tensor) -> Tensor:
    """Scale every channel of ``X`` by the attention weight at its position."""
    _check_map(X, "apply_attention")
    if A.weights.shape != X.shape[:-1]:
        raise ShapeError(f"apply_attention: attention {A.weights.shape} vs map {X.shape}")
    return X * ad.expand(A.weights, axis=-1, count=X.shape[-1])


def conv_alstm_step(
    X: Tensor,
    state: CellState,
    params: ConvCellParams,
) -> Tuple[CellState, AttentionMap]:
    """Attention from ``(X_t, H_{t-1})``, reweighting, then a ConvLSTM step on the reweighted map."""
    _check_state(X, state, params.hidden_channels, "conv_alstm_step")
    attention = conv_attention(X, state.h, params)
    return conv_lstm_step(apply_attention(attention, X), state, params), attention


def motion_layer_step(
    M: Tensor,
    state_m: CellState,
    h_top_prev: Tensor,
    params: MotionLayerParams,
) -> CellState:
    """Bottom VideoLSTM layer: gates see the flow map, its own state and the previous top state."""
    _check_map(M, "motion_layer_step")
    _check_state(M, state_m, params.hidden_channels, "motion_layer_step")
    if h_top_prev.shape[:-1] != M.shape[:-1]:
        raise ShapeError(f"motion_layer_step: top hidden {h_top_prev.shape} vs flow map {M.shape}")
    z = (
        ad.conv2d(M, params.w_x, params.b)
        + ad.conv2d(state_m.h, params.w_h)
        + ad.conv2d(h_top_prev, params.w_e)
    )
    return gate_update(z, state_m)


def videolstm_step(
    X: Tensor,
    M: Tensor,
    state_top: CellState,
    state_bottom: CellState,
    h_top_prev: Optional[Tensor],
    params: VideoLSTMParams,
) -> Tuple[CellState, CellState, AttentionMap]:
    """Motion layer, attention conditioned on its hidden state, then the top ConvLSTM.

    The bottom layer reaches the classifier only through the attention map.
    """
    if X.shape[:-1] != M.shape[:-1]:
        raise ShapeError(f"videolstm_step: appearance {X.shape} and flow {M.shape} differ spatially")
    h_top = state_top.h if h_top_prev is None else h_top_prev
    bottom = motion_layer_step(M, state_bottom, h_top, params.bottom)
    attention = conv_attention(X, bottom.h, params.top)
    top = conv_lstm_step(apply_attention(attention, X), state_top, params.top)
    return top, bottom, attention
