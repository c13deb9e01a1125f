import io
import math

import numpy as np
import pytest

from videolstm import autodiff as ad
from videolstm.autodiff import Tensor, backward, check_gradients, constant, parameter
from videolstm.autodiff.serialize import dumps_sections, load_tensor, loads_sections, read_tensor, write_tensor
from videolstm.errors import ConfigurationError, FormatError, ShapeError, UsageError


def _weighted_sum(out: Tensor, weights: np.ndarray) -> Tensor:
    return ad.reduce_sum(out * constant(weights))


def test_conv2d_identity_scaled_kernel():
    x = constant(np.ones((3, 3, 1)))
    kernel = constant(np.full((1, 1, 1, 1), 2.0))
    out = ad.conv2d(x, kernel, constant(np.zeros(1)))
    assert out.shape == (3, 3, 1)
    assert np.all(out.data == 2.0)


def test_conv2d_same_padding_counts_window_entries():
    x = constant(np.ones((3, 3, 1)))
    out = ad.conv2d(x, constant(np.ones((3, 3, 1, 1))), constant(np.zeros(1)))
    expected = np.array([[4, 6, 4], [6, 9, 6], [4, 6, 4]], dtype=float)
    np.testing.assert_array_equal(out.data[..., 0], expected)


def test_conv2d_rejects_even_kernel_and_channel_mismatch():
    with pytest.raises(ConfigurationError):
        ad.conv2d(constant(np.ones((4, 4, 1))), constant(np.ones((2, 2, 1, 1))))
    with pytest.raises(ShapeError):
        ad.conv2d(constant(np.ones((4, 4, 2))), constant(np.ones((3, 3, 1, 1))))


def test_elementwise_examples():
    zeros = constant(np.zeros((2, 3)))
    assert np.all(ad.sigmoid(zeros).data == 0.5)
    assert np.all(ad.tanh(zeros).data == 0.0)
    x = constant(np.arange(6.0).reshape(2, 3))
    np.testing.assert_array_equal(ad.hadamard(x, constant(np.ones((2, 3)))).data, x.data)
    np.testing.assert_array_equal(ad.elementwise("scale", x, factor=3.0).data, 3.0 * x.data)
    with pytest.raises(ShapeError):
        ad.hadamard(x, constant(np.ones((3, 2))))
    with pytest.raises(UsageError):
        ad.elementwise("relu", x)


def test_sigmoid_is_finite_for_large_inputs():
    out = ad.sigmoid(constant(np.array([-1000.0, 1000.0])))
    np.testing.assert_allclose(out.data, [0.0, 1.0])


def test_dense_examples():
    x = constant(np.array([[1.0, -2.0, 3.0]]))
    np.testing.assert_array_equal(ad.dense(x, constant(np.eye(3)), constant(np.zeros(3))).data, x.data)
    bias = np.array([0.5, -1.0])
    np.testing.assert_array_equal(ad.dense(x, constant(np.zeros((3, 2))), constant(bias)).data, [bias])
    with pytest.raises(ShapeError):
        ad.dense(x, constant(np.zeros((2, 2))))


def test_spatial_softmax_examples():
    uniform = ad.spatial_softmax(constant(np.full((4, 4), 3.7)))
    np.testing.assert_allclose(uniform.data, 1.0 / 16)

    z = np.log(np.array([[1.0, 1.0], [2.0, 4.0]]))
    out = ad.spatial_softmax(constant(z))
    np.testing.assert_allclose(out.data, [[0.125, 0.125], [0.25, 0.5]], atol=1e-15)
    shifted = ad.spatial_softmax(constant(z + 11.0))
    np.testing.assert_allclose(shifted.data, out.data, atol=1e-15)


def test_spatial_softmax_sums_to_one(rng):
    for _ in range(1000):
        n = int(rng.integers(1, 6))
        out = ad.spatial_softmax(constant(rng.normal(scale=5.0, size=(2, n, n))))
        assert np.all(out.data >= 0)
        np.testing.assert_allclose(out.data.sum(axis=(-2, -1)), 1.0, atol=1e-12)


def test_backward_product_and_tanh():
    x = parameter(np.array(3.0))
    y = parameter(np.array(-2.0))
    grads = backward(x * y)
    assert grads[x] == pytest.approx(-2.0)
    assert grads[y] == pytest.approx(3.0)

    a = parameter(np.array(0.4))
    grads = backward(ad.tanh(a))
    assert grads[a] == pytest.approx(1.0 - math.tanh(0.4) ** 2)


def test_backward_accumulates_over_fan_out():
    x = parameter(np.array([1.5, -0.5]))
    loss = ad.reduce_sum(x * x + x)
    grads = backward(loss)
    np.testing.assert_allclose(grads[x], 2.0 * x.data + 1.0)


def test_backward_requires_scalar():
    x = parameter(np.ones(3))
    with pytest.raises(UsageError):
        backward(x * x)


def test_backward_of_constant_graph_is_empty():
    assert backward(ad.reduce_sum(constant(np.ones(3)))) == {}


@pytest.mark.parametrize(
    "build",
    [
        lambda x, w: ad.sigmoid(x),
        lambda x, w: ad.tanh(x),
        lambda x, w: ad.softmax(x, axes=-1),
        lambda x, w: ad.spatial_softmax(ad.reshape(x, (3, 2, 2))),
        lambda x, w: ad.dense(x, w),
        lambda x, w: ad.expand(x, axis=1, count=3),
        lambda x, w: ad.stack(ad.split(x, 2, axis=-1), axis=0),
        lambda x, w: ad.take_last(ad.softmax(x), [0, 3, 1]),
        lambda x, w: ad.log_clamped(ad.sigmoid(x)),
        lambda x, w: ad.mean(x, axis=0),
    ],
)
def test_op_gradients_match_finite_differences(build, rng):
    x = parameter(rng.normal(size=(3, 4)), name="x")
    w = constant(rng.normal(size=(4, 3)))
    weights = rng.normal(size=build(x, w).shape)
    result = check_gradients(lambda: _weighted_sum(build(x, w), weights), [x])
    assert result.passed(1e-4), result.to_dict()


def test_conv2d_and_max_pool_gradients(rng):
    x = parameter(rng.normal(size=(2, 4, 4, 2)), name="x")
    kernel = parameter(rng.normal(size=(3, 3, 2, 3)), name="kernel")
    bias = parameter(rng.normal(size=3), name="bias")
    weights = rng.normal(size=(2, 2, 2, 3))

    def loss():
        return _weighted_sum(ad.max_pool2d(ad.tanh(ad.conv2d(x, kernel, bias)), 2), weights)

    result = check_gradients(loss, [x, kernel, bias])
    assert result.passed(1e-4), result.to_dict()


def test_tensor_roundtrip_and_malformed_headers(tmp_path):
    array = np.arange(24, dtype=np.float64).reshape(2, 3, 4) / 7.0
    path = tmp_path / "a.tnsr"
    write_tensor(path, array)
    np.testing.assert_array_equal(read_tensor(path), array)

    with pytest.raises(FormatError):
        load_tensor(io.BytesIO(b"XXXX 1 2\n" + b"\0" * 16))
    with pytest.raises(FormatError):
        load_tensor(io.BytesIO(b"TNSR 2 3\n"))
    with pytest.raises(FormatError):
        load_tensor(io.BytesIO(b"TNSR 1 4\n" + b"\0" * 8))


def test_sections_reject_duplicates():
    blob = dumps_sections({"a": np.zeros(2)})
    with pytest.raises(FormatError):
        loads_sections(blob + blob)
    assert set(loads_sections(blob)) == {"a"}
