"""Fully connected cells: LSTM, soft-attention ALSTM and its motion-conditioned variant."""

from __future__ import annotations

from typing import Tuple, Union

from .. import autodiff as ad
from ..autodiff import Tensor
from ..errors import ShapeError, UsageError
from .params import VectorCellParams
from .state import AttentionMap, CellState, gate_update


def _check_state(state: CellState, lead, hidden: int) -> None:
    expected = (*lead, hidden)
    if state.shape != expected:
        raise ShapeError(f"Vector cell state {state.shape} does not match expected {expected}")


def lstm_step(x: Tensor, state: CellState, params: VectorCellParams) -> CellState:
    """One LSTM transition on a ``(..., D)`` input."""
    if x.shape[-1:] != (params.input_dim,):
        raise ShapeError(f"lstm_step: input {x.shape} does not end in D={params.input_dim}")
    _check_state(state, x.shape[:-1], params.hidden_dim)
    z = ad.dense(x, params.w_x, params.b) + ad.dense(state.h, params.w_h)
    return gate_update(z, state)


def motion_vector_step(
    m: Tensor,
    state_m: CellState,
    h_top_prev: Tensor,
    params: VectorCellParams,
) -> CellState:
    """Bottom LSTM of the motion-conditioned ALSTM; ``w_e`` reads the previous top hidden state."""
    if params.w_e is None:
        raise UsageError("motion_vector_step needs parameters with a top-down weight 'w_e'")
    if m.shape[-1:] != (params.input_dim,):
        raise ShapeError(f"motion_vector_step: input {m.shape} does not end in D={params.input_dim}")
    _check_state(state_m, m.shape[:-1], params.hidden_dim)
    if h_top_prev.shape != state_m.shape:
        raise ShapeError(f"motion_vector_step: top hidden {h_top_prev.shape} != {state_m.shape}")
    z = (
        ad.dense(m, params.w_x, params.b)
        + ad.dense(state_m.h, params.w_h)
        + ad.dense(h_top_prev, params.w_e)
    )
    return gate_update(z, state_m)


def alstm_attention(
    x: Tensor,
    h_cond: Tensor,
    params: VectorCellParams,
    *,
    return_logits: bool = False,
) -> Union[Tensor, Tuple[Tensor, Tensor]]:
    """Softmax weights over the ``R`` regions of ``x`` (``(..., R, D)``).

    Scores come from a one-hidden-layer perceptron
    ``w_z · tanh(W_xa x_r + W_ha h + b_a)`` shared by all regions.
    """
    if not params.has_attention:
        raise UsageError("alstm_attention needs attention parameters")
    if x.ndim < 2:
        raise ShapeError(f"alstm_attention: expected (..., R, D) regions, got {x.shape}")
    if h_cond.shape != (*x.shape[:-2], params.hidden_dim):
        raise ShapeError(f"alstm_attention: conditioning {h_cond.shape} does not match regions {x.shape}")
    regions = x.shape[-2]
    cond = ad.expand(ad.dense(h_cond, params.w_ha, params.b_a), axis=-2, count=regions)
    hidden = ad.tanh(ad.dense(x, params.w_xa) + cond)
    logits = ad.reshape(ad.dense(hidden, params.w_z), x.shape[:-1])
    weights = ad.softmax(logits, axes=-1)
    return (weights, logits) if return_logits else weights


def _as_regions(X: Tensor) -> Tensor:
    if X.ndim < 3:
        raise ShapeError(f"Expected an (..., N, N, D) feature map, got {X.shape}")
    n1, n2, d = X.shape[-3:]
    return ad.reshape(X, (*X.shape[:-3], n1 * n2, d))


def _pooled_step(
    X: Tensor,
    h_cond: Tensor,
    state: CellState,
    params: VectorCellParams,
) -> Tuple[CellState, AttentionMap]:
    regions = _as_regions(X)
    weights, logits = alstm_attention(regions, h_cond, params, return_logits=True)
    # expectation over regions: Σ_r a_r x_r
    d = X.shape[-1]
    spread = ad.expand(weights, axis=-1, count=d)
    pooled = ad.reduce_sum(regions * spread, axis=-2)
    new_state = lstm_step(pooled, state, params)
    grid = X.shape[-3:-1]
    attention = AttentionMap(
        weights=ad.reshape(weights, (*X.shape[:-3], *grid)),
        logits=ad.reshape(logits, (*X.shape[:-3], *grid)),
    )
    return new_state, attention


def alstm_step(
    X: Tensor,
    state: CellState,
    params: VectorCellParams,
    *,
    return_attention: bool = False,
) -> Union[CellState, Tuple[CellState, AttentionMap]]:
    """Attention-pooled LSTM step on an ``(..., N, N, D)`` feature map."""
    new_state, attention = _pooled_step(X, state.h, state, params)
    return (new_state, attention) if return_attention else new_state


def motion_alstm_step(
    X: Tensor,
    m: Tensor,
    state_top: CellState,
    state_bottom: CellState,
    params_top: VectorCellParams,
    params_bottom: VectorCellParams,
) -> Tuple[CellState, CellState, AttentionMap]:
    """Bottom motion LSTM first, then ALSTM whose attention is conditioned on its hidden state."""
    bottom = motion_vector_step(m, state_bottom, state_top.h, params_bottom)
    top, attention = _pooled_step(X, bottom.h, state_top, params_top)
    return top, bottom, attention


def spatial_mean(X: Tensor) -> Tensor:
    """Mean over the two spatial axes of an ``(..., N, N, D)`` map."""
    if X.ndim < 3:
        raise ShapeError(f"Expected an (..., N, N, D) feature map, got {X.shape}")
    return ad.mean(X, axis=(-3, -2))

