import numpy as np
import pytest

from videolstm import autodiff as ad
from videolstm.autodiff import check_gradients, constant, parameter
from videolstm.cells import (
    AttentionMap,
    CellState,
    ConvCellParams,
    MotionALSTMParams,
    VectorCellParams,
    VideoLSTMParams,
    alstm_attention,
    alstm_step,
    apply_attention,
    conv_alstm_step,
    conv_attention,
    conv_lstm_step,
    init_conv_cell,
    init_vector_cell,
    lstm_step,
    motion_alstm_step,
    motion_layer_step,
    motion_vector_step,
    spatial_mean,
    videolstm_step,
)
from videolstm.cells.state import gate_update
from videolstm.errors import ConfigurationError, ShapeError

N, D, K, T = 3, 4, 4, 3


def _zero_like(params):
    for tensor in params.named_tensors().values():
        tensor.data = np.zeros_like(tensor.data)
    return params


def _unroll(variant: str, params, xs, ms):
    if variant in ("lstm", "alstm", "motion_alstm"):
        state = CellState.zeros((K,))
    else:
        state = CellState.zeros((N, N, K))
    bottom = CellState.zeros((K,) if variant == "motion_alstm" else (N, N, K))
    for t in range(T):
        if variant == "lstm":
            state = lstm_step(xs[t], state, params)
        elif variant == "alstm":
            state = alstm_step(xs[t], state, params)
        elif variant == "conv_lstm":
            state = conv_lstm_step(xs[t], state, params)
        elif variant == "conv_alstm":
            state, _ = conv_alstm_step(xs[t], state, params)
        elif variant == "motion_alstm":
            state, bottom, _ = motion_alstm_step(xs[t], spatial_mean(ms[t]), state, bottom, params.top, params.bottom)
        else:
            state, bottom, _ = videolstm_step(xs[t], ms[t], state, bottom, state.h, params)
    return state


def _variant_setup(variant: str, rng):
    if variant == "lstm":
        params = init_vector_cell(rng, D, K)
        xs = [constant(rng.normal(size=D)) for _ in range(T)]
    elif variant == "alstm":
        params = init_vector_cell(rng, D, K, attention=True)
        xs = [constant(rng.normal(size=(N, N, D))) for _ in range(T)]
    elif variant == "motion_alstm":
        params = MotionALSTMParams(
            bottom=init_vector_cell(rng, D, K, top_down=True),
            top=init_vector_cell(rng, D, K, attention=True),
        )
        xs = [constant(rng.normal(size=(N, N, D))) for _ in range(T)]
    elif variant in ("conv_lstm", "conv_alstm"):
        params = init_conv_cell(rng, D, K, attention=variant == "conv_alstm")
        xs = [constant(rng.normal(size=(N, N, D))) for _ in range(T)]
    else:
        params = VideoLSTMParams(
            bottom=init_conv_cell(rng, D, K, top_down=True),
            top=init_conv_cell(rng, D, K, attention=True),
        )
        xs = [constant(rng.normal(size=(N, N, D))) for _ in range(T)]
    ms = [constant(rng.normal(size=(N, N, D))) for _ in range(T)]
    return params, xs, ms


@pytest.mark.parametrize("variant", ["lstm", "alstm", "motion_alstm", "conv_lstm", "conv_alstm", "videolstm"])
def test_unrolled_gradients_match_finite_differences(variant, rng):
    params, xs, ms = _variant_setup(variant, rng)
    final = _unroll(variant, params, xs, ms)
    weights = constant(rng.normal(size=final.h.shape))
    named = params.named_tensors()
    for key, tensor in named.items():
        tensor.name = key

    def loss():
        return ad.reduce_sum(_unroll(variant, params, xs, ms).h * weights)

    result = check_gradients(loss, list(named.values()))
    assert result.passed(1e-4), result.to_dict()


def test_attention_weights_sum_to_one(rng):
    conv_params = init_conv_cell(rng, D, K, attention=True)
    vec_params = init_vector_cell(rng, D, K, attention=True)
    for draw in range(1000):
        if draw % 100 == 0:
            conv_params = init_conv_cell(rng, D, K, attention=True)
            vec_params = init_vector_cell(rng, D, K, attention=True)
        X = constant(rng.normal(scale=3.0, size=(N, N, D)))
        H = constant(rng.normal(size=(N, N, K)))
        A = conv_attention(X, H, conv_params)
        assert abs(A.weights.data.sum() - 1.0) < 1e-12
        assert np.all(A.weights.data >= 0)
        regions = constant(rng.normal(scale=3.0, size=(N * N, D)))
        weights = alstm_attention(regions, constant(rng.normal(size=K)), vec_params)
        assert abs(weights.data.sum() - 1.0) < 1e-12


def _as_conv(vec: VectorCellParams) -> ConvCellParams:
    def kernel(tensor):
        return None if tensor is None else parameter(tensor.data.reshape(1, 1, *tensor.shape))

    return ConvCellParams(
        w_x=kernel(vec.w_x),
        w_h=kernel(vec.w_h),
        b=parameter(vec.b.data),
        w_xa=kernel(vec.w_xa),
        w_ha=kernel(vec.w_ha),
        b_a=None if vec.b_a is None else parameter(vec.b_a.data),
        w_z=kernel(vec.w_z),
    )


def test_single_cell_convolutional_cells_match_vector_cells(rng):
    for _ in range(100):
        vec = init_vector_cell(rng, D, K, attention=True)
        vec.b.data = rng.normal(size=4 * K)
        vec.b_a.data = rng.normal(size=K)
        conv = _as_conv(vec)
        x = rng.normal(size=D)
        h0, c0 = rng.normal(size=K), rng.normal(size=K)
        vec_state = CellState(constant(h0), constant(c0))
        conv_state = CellState(constant(h0.reshape(1, 1, K)), constant(c0.reshape(1, 1, K)))

        expected = lstm_step(constant(x), vec_state, vec)
        got = conv_lstm_step(constant(x.reshape(1, 1, D)), conv_state, conv)
        np.testing.assert_allclose(got.h.data.reshape(K), expected.h.data, rtol=0, atol=1e-12)
        np.testing.assert_allclose(got.c.data.reshape(K), expected.c.data, rtol=0, atol=1e-12)

        expected = alstm_step(constant(x.reshape(1, 1, D)), vec_state, vec)
        got, attention = conv_alstm_step(constant(x.reshape(1, 1, D)), conv_state, conv)
        assert attention.weights.data.item() == pytest.approx(1.0, abs=1e-15)
        np.testing.assert_allclose(got.h.data.reshape(K), expected.h.data, rtol=0, atol=1e-12)


def test_zero_parameters_give_half_open_gates_and_zero_state(rng):
    params = _zero_like(init_vector_cell(rng, D, K))
    state = lstm_step(constant(rng.normal(size=D)), CellState.zeros((K,)), params)
    np.testing.assert_array_equal(state.c.data, 0.0)
    np.testing.assert_array_equal(state.h.data, 0.0)

    conv = _zero_like(init_conv_cell(rng, D, K))
    state = conv_lstm_step(constant(rng.normal(size=(N, N, D))), CellState.zeros((N, N, K)), conv)
    np.testing.assert_array_equal(state.h.data, 0.0)


def test_forget_bias_alone_keeps_memory_empty(rng):
    params = _zero_like(init_vector_cell(rng, D, K))
    params.b.data[K : 2 * K] = 1.0
    state = lstm_step(constant(np.zeros(D)), CellState.zeros((K,)), params)
    np.testing.assert_array_equal(state.c.data, 0.0)
    np.testing.assert_array_equal(state.h.data, 0.0)


def test_initial_forget_bias_is_one(rng):
    bias = init_vector_cell(rng, D, K).b.data
    np.testing.assert_array_equal(bias[K : 2 * K], 1.0)
    np.testing.assert_array_equal(np.delete(bias, np.s_[K : 2 * K]), 0.0)


def test_conv_attention_is_uniform_for_constant_input(rng):
    params = init_conv_cell(rng, D, K, attention=True, attention_kernel=1)
    X = constant(np.broadcast_to(rng.normal(size=D), (N, N, D)).copy())
    A = conv_attention(X, constant(np.zeros((N, N, K))), params)
    np.testing.assert_allclose(A.weights.data, 1.0 / (N * N), atol=1e-15)


def test_apply_attention_examples(rng):
    X = constant(rng.normal(size=(N, N, D)))
    uniform = AttentionMap(weights=constant(np.full((N, N), 1.0 / (N * N))), logits=constant(np.zeros((N, N))))
    np.testing.assert_allclose(apply_attention(uniform, X).data, X.data / (N * N))

    one_hot = np.zeros((N, N))
    one_hot[1, 2] = 1.0
    out = apply_attention(AttentionMap(constant(one_hot), constant(one_hot)), X).data
    np.testing.assert_array_equal(out[1, 2], X.data[1, 2])
    mask = np.ones((N, N), dtype=bool)
    mask[1, 2] = False
    assert np.all(out[mask] == 0.0)

    with pytest.raises(ShapeError):
        apply_attention(uniform, constant(np.ones((N + 1, N + 1, D))))


def test_alstm_with_flat_scores_pools_the_spatial_mean(rng):
    params = init_vector_cell(rng, D, K, attention=True)
    params.w_z.data = np.zeros_like(params.w_z.data)
    X = constant(rng.normal(size=(N, N, D)))
    state = CellState(constant(rng.normal(size=K)), constant(rng.normal(size=K)))
    got, attention = alstm_step(X, state, params, return_attention=True)
    np.testing.assert_allclose(attention.weights.data, 1.0 / (N * N))
    expected = lstm_step(spatial_mean(X), state, params)
    np.testing.assert_allclose(got.h.data, expected.h.data, atol=1e-12)


def test_conv_alstm_first_step_runs_conv_lstm_on_scaled_input(rng):
    params = init_conv_cell(rng, D, K, attention=True, attention_kernel=1)
    X = constant(np.broadcast_to(rng.normal(size=D), (N, N, D)).copy())
    zero = CellState.zeros((N, N, K))
    got, attention = conv_alstm_step(X, zero, params)
    np.testing.assert_allclose(attention.weights.data, 1.0 / (N * N), atol=1e-15)
    expected = conv_lstm_step(constant(X.data / (N * N)), zero, params)
    np.testing.assert_allclose(got.h.data, expected.h.data, atol=1e-12)


def test_motion_layer_without_top_down_kernel_is_a_conv_lstm(rng):
    params = init_conv_cell(rng, D, K, top_down=True)
    params.w_e.data = np.zeros_like(params.w_e.data)
    M = constant(rng.normal(size=(N, N, D)))
    state = CellState(constant(rng.normal(size=(N, N, K))), constant(rng.normal(size=(N, N, K))))
    h_top = constant(rng.normal(size=(N, N, K)))
    got = motion_layer_step(M, state, h_top, params)
    expected = conv_lstm_step(M, state, params)
    np.testing.assert_allclose(got.h.data, expected.h.data, atol=1e-12)


def test_videolstm_with_zero_motion_layer_conditions_only_on_appearance(rng):
    params = VideoLSTMParams(
        bottom=_zero_like(init_conv_cell(rng, D, K, top_down=True)),
        top=init_conv_cell(rng, D, K, attention=True),
    )
    X = constant(rng.normal(size=(N, N, D)))
    M = constant(rng.normal(size=(N, N, D)))
    state = CellState(constant(rng.normal(size=(N, N, K))), constant(rng.normal(size=(N, N, K))))
    top, bottom, attention = videolstm_step(X, M, state, CellState.zeros((N, N, K)), state.h, params)
    np.testing.assert_array_equal(bottom.h.data, 0.0)
    expected = conv_attention(X, constant(np.zeros((N, N, K))), params.top)
    np.testing.assert_allclose(attention.weights.data, expected.weights.data, atol=1e-15)


def test_shape_errors(rng):
    params = init_vector_cell(rng, D, K)
    with pytest.raises(ShapeError):
        lstm_step(constant(np.zeros(D + 1)), CellState.zeros((K,)), params)
    with pytest.raises(ShapeError):
        lstm_step(constant(np.zeros(D)), CellState.zeros((K + 1,)), params)
    conv = init_conv_cell(rng, D, K)
    with pytest.raises(ShapeError):
        conv_lstm_step(constant(np.zeros((N, N, D))), CellState.zeros((N + 1, N + 1, K)), conv)
    with pytest.raises(ShapeError):
        CellState(constant(np.zeros(K)), constant(np.zeros(K + 1)))


def test_even_kernels_are_rejected(rng):
    with pytest.raises(ConfigurationError):
        init_conv_cell(rng, D, K, kernel=2)


def test_memory_grows_by_at_most_one_per_step(rng):
    params = init_conv_cell(rng, D, K)
    state = CellState.zeros((N, N, K))
    for _ in range(20):
        previous = np.abs(state.c.data)
        state = conv_lstm_step(constant(rng.normal(scale=4.0, size=(N, N, D))), state, params)
        assert np.all(np.abs(state.c.data) <= previous + 1.0 + 1e-12)


def test_motion_vector_step_with_zero_top_down_weight_is_an_lstm(rng):
    params = init_vector_cell(rng, D, K, top_down=True)
    m = constant(rng.normal(size=D))
    state = CellState(constant(rng.normal(size=K)), constant(rng.normal(size=K)))
    h_top = constant(rng.normal(size=K))
    with_top = motion_vector_step(m, state, h_top, params)
    params.w_e.data = np.zeros_like(params.w_e.data)
    got = motion_vector_step(m, state, h_top, params)
    np.testing.assert_allclose(got.h.data, lstm_step(m, state, params).h.data, atol=1e-12)
    assert not np.allclose(with_top.h.data, got.h.data)
    with pytest.raises(ShapeError):
        motion_vector_step(m, state, constant(np.zeros(K + 1)), params)


def test_gate_update_with_zero_preactivations():
    previous = CellState(constant(np.full(K, 2.0)), constant(np.full(K, 2.0)))
    state = gate_update(constant(np.zeros(4 * K)), previous)
    np.testing.assert_allclose(state.c.data, 1.0)
    np.testing.assert_allclose(state.h.data, 0.5 * np.tanh(1.0))
