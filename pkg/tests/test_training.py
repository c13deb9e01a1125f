import math

import numpy as np
import pytest

from videolstm.autodiff import parameter
from videolstm.config import CellVariant, Stream, TrainConfig
from videolstm.data import GlyphSpec, MotionProgram, VideoClip, generate_clip
from videolstm.errors import DivergenceError, ShapeError, UsageError
from videolstm.model import VideoModel
from videolstm.preprocessing import prepare_batch
from videolstm.training import (
    RMSProp,
    clip_gradients,
    compute_batch_gradients,
    predict_clips,
    rmsprop_update,
    sample_snippet,
    segment_starts,
    test_protocol as segment_protocol,
    total_iterations,
    train,
)


def _ramp_clip(length: int, size: int = 4) -> VideoClip:
    """Frame ``t`` is filled with ``t`` so windows reveal their start."""
    frames = np.broadcast_to(np.arange(length, dtype=np.float32)[:, None, None, None], (length, size, size, 1))
    return VideoClip(
        frames=frames.copy(),
        flow=np.ones((length, size, size, 2), dtype=np.float32),
        boxes=[None] * length,
        label=0,
        clip_id="ramp",
    )


def _glyph_clip(program: MotionProgram, frames: int = 6, size: int = 16, seed: int = 0) -> VideoClip:
    spec = GlyphSpec(program=program, size=6, speed=2.0)
    return generate_clip(spec, frames, size, size, np.random.default_rng(seed), clip_id=program.value)


def test_rmsprop_first_step_magnitude():
    cfg = TrainConfig(learning_rate=0.001, decay=0.9)
    grad = np.array([0.5, -2.0, 10.0])
    param, cache = rmsprop_update(np.zeros(3), grad, np.zeros(3), cfg)
    np.testing.assert_allclose(cache, 0.1 * grad * grad)
    np.testing.assert_allclose(np.abs(param), 0.001 / math.sqrt(0.1), rtol=1e-6)
    assert np.abs(param[0]) == pytest.approx(0.00316, abs=1e-5)
    np.testing.assert_array_equal(np.sign(param), -np.sign(grad))


def test_rmsprop_zero_gradient_only_decays_cache():
    cfg = TrainConfig()
    param, cache = rmsprop_update(np.full(2, 3.0), np.zeros(2), np.full(2, 4.0), cfg)
    np.testing.assert_array_equal(param, 3.0)
    np.testing.assert_allclose(cache, 3.6)


def test_rmsprop_equal_gradients_equal_updates():
    cfg = TrainConfig()
    a, _ = rmsprop_update(np.zeros(1), np.array([0.7]), np.zeros(1), cfg)
    b, _ = rmsprop_update(np.zeros(1), np.array([0.7]), np.zeros(1), cfg)
    np.testing.assert_array_equal(a, b)


def test_rmsprop_rejects_non_finite_gradients():
    cfg = TrainConfig()
    with pytest.raises(DivergenceError) as info:
        rmsprop_update(np.zeros(2), np.array([1.0, np.nan]), np.zeros(2), cfg, name="w")
    assert info.value.diagnostics["parameter"] == "w"
    with pytest.raises(ShapeError):
        rmsprop_update(np.zeros(2), np.zeros(3), np.zeros(2), cfg)


def test_optimizer_step_is_all_or_nothing():
    opt = RMSProp(TrainConfig())
    params = {"a": parameter(np.ones(2)), "b": parameter(np.ones(2))}
    with pytest.raises(DivergenceError):
        opt.step(params, {"a": np.ones(2), "b": np.array([np.inf, 0.0])})
    np.testing.assert_array_equal(params["a"].data, 1.0)
    assert opt.caches == {}


def test_optimizer_state_must_be_nonnegative():
    opt = RMSProp(TrainConfig())
    with pytest.raises(ValueError):
        opt.load_state({"a": np.array([-1.0])})


def test_clip_gradients_preserves_direction():
    grads = {"a": np.array([3.0, 0.0]), "b": np.array([4.0])}
    clipped, norm = clip_gradients(grads, 1.0)
    assert norm == pytest.approx(5.0)
    np.testing.assert_allclose(clipped["a"], [0.6, 0.0])
    np.testing.assert_allclose(clipped["b"], [0.8])
    untouched, _ = clip_gradients(grads, None)
    np.testing.assert_array_equal(untouched["a"], grads["a"])


def test_sample_snippet_whole_clip_and_padding(rng):
    clip = _ramp_clip(5)
    whole = sample_snippet(clip, 5, rng)
    np.testing.assert_array_equal(whole.frames, clip.frames)

    padded = sample_snippet(clip, 8, rng)
    assert padded.length == 8
    np.testing.assert_array_equal(padded.frames[4:, 0, 0, 0], 4.0)
    np.testing.assert_array_equal(padded.flow[5:], 0.0)
    np.testing.assert_array_equal(padded.flow[:5], 1.0)


def test_sample_snippet_start_is_uniform(rng):
    clip = _ramp_clip(31)
    draws = 10_000
    starts = np.array([sample_snippet(clip, 30, rng).frames[0, 0, 0, 0] for _ in range(draws)])
    assert set(np.unique(starts)) <= {0.0, 1.0}
    zeros = int(np.sum(starts == 0.0))
    chi2 = 2 * (zeros - draws / 2) ** 2 / (draws / 2)
    assert chi2 < 10.83


def test_sample_snippet_rejects_empty_clip(rng):
    empty = VideoClip(frames=np.zeros((0, 4, 4, 1)), flow=np.zeros((0, 4, 4, 2)), boxes=[], label=0)
    with pytest.raises(UsageError):
        sample_snippet(empty, 3, rng)


def test_segment_starts():
    assert segment_starts(30, 25, 30) == [0] * 25
    assert segment_starts(10, 3, 4) == [0, 3, 6]
    assert segment_starts(5, 1, 16) == [0]
    with pytest.raises(UsageError):
        segment_starts(0, 3, 4)


def test_total_iterations():
    assert total_iterations(TrainConfig(max_iterations=7), 100) == 7
    assert total_iterations(TrainConfig(batch_size=4, max_epochs=3), 10) == 9


def test_protocol_outputs_a_distribution(tiny_model_config):
    model = VideoModel.initialize(tiny_model_config, Stream.RGB, seed=0)
    clip = _glyph_clip(MotionProgram.DIAGONAL, frames=9)
    probs = segment_protocol(clip, model, segments=5, length=4)
    assert probs.shape == (tiny_model_config.num_classes,)
    assert probs.sum() == pytest.approx(1.0, abs=1e-12)


def test_protocol_with_identical_segments_matches_one_segment(tiny_model_config):
    model = VideoModel.initialize(tiny_model_config, Stream.RGB, seed=0)
    clip = _glyph_clip(MotionProgram.HORIZONTAL_BOUNCE, frames=6)
    many = segment_protocol(clip, model, segments=25, length=6)
    batch = prepare_batch([clip], Stream.RGB, with_flow=True)
    single = model.predict(batch.inputs, batch.flow)[0]
    np.testing.assert_allclose(many, single, atol=1e-12)


def test_protocol_of_uniform_model_is_uniform(tiny_model_config):
    model = VideoModel.initialize(tiny_model_config.model_copy(update={"variant": CellVariant.LSTM}), seed=0)
    for tensor in model.head.named_tensors().values():
        tensor.data = np.zeros_like(tensor.data)
    probs = predict_clips([_glyph_clip(MotionProgram.VERTICAL_BOUNCE)], model, segments=3, length=4)
    np.testing.assert_allclose(probs, 1.0 / tiny_model_config.num_classes)


def test_batch_gradients_agree_across_worker_counts(tiny_model_config):
    model = VideoModel.initialize(tiny_model_config, seed=5)
    clips = [_glyph_clip(program, seed=i) for i, program in enumerate(list(MotionProgram)[:3])]
    batch = prepare_batch(clips, Stream.RGB, with_flow=True)
    loss1, grads1, acc1 = compute_batch_gradients(model, batch, workers=1)
    loss3, grads3, acc3 = compute_batch_gradients(model, batch, workers=3)
    assert loss3 == pytest.approx(loss1, rel=1e-12)
    assert acc3 == acc1
    for key in grads1:
        np.testing.assert_allclose(grads3[key], grads1[key], rtol=1e-9, atol=1e-14)


def test_zero_learning_rate_freezes_parameters(tiny_model_config, tiny_train_config):
    cfg = tiny_model_config.model_copy(update={"variant": CellVariant.LSTM})
    model = VideoModel.initialize(cfg, seed=1)
    before = model.state_arrays()
    clips = [_glyph_clip(MotionProgram.DIAGONAL, seed=s) for s in range(3)]
    result = train(clips, model, tiny_train_config.model_copy(update={"learning_rate": 0.0}))
    assert len(result.trace) == tiny_train_config.max_iterations
    for key, value in model.state_arrays().items():
        np.testing.assert_array_equal(value, before[key])


def test_training_is_deterministic(tiny_model_config, tiny_train_config):
    clips = [_glyph_clip(program, seed=i) for i, program in enumerate(list(MotionProgram)[:3])]
    traces = []
    for _ in range(2):
        model = VideoModel.initialize(tiny_model_config, seed=1)
        traces.append(train(clips, model, tiny_train_config).trace)
    assert traces[0].equals(traces[1])
    assert list(traces[0].columns) == ["iteration", "loss", "train_acc"]


def test_training_rejects_empty_dataset(tiny_model_config, tiny_train_config):
    with pytest.raises(UsageError):
        train([], VideoModel.initialize(tiny_model_config), tiny_train_config)


def test_resumed_training_runs_remaining_iterations(tiny_model_config, tiny_train_config):
    clips = [_glyph_clip(MotionProgram.DIAGONAL)]
    model = VideoModel.initialize(tiny_model_config.model_copy(update={"variant": CellVariant.LSTM}), seed=0)
    result = train(clips, model, tiny_train_config, start_iteration=2)
    assert result.trace["iteration"].tolist() == [3]
    assert result.iterations == 3


def test_checkpoint_hook_fires_on_schedule(tiny_model_config, tiny_train_config):
    seen = []
    cfg = tiny_train_config.model_copy(update={"max_iterations": 4, "checkpoint_every": 2})
    model = VideoModel.initialize(tiny_model_config.model_copy(update={"variant": CellVariant.LSTM}), seed=0)
    train([_glyph_clip(MotionProgram.DIAGONAL)], model, cfg, on_checkpoint=lambda m, o, i: seen.append(i))
    assert seen == [2, 4]


def test_divergence_reports_last_good_parameters(tiny_model_config, tiny_train_config):
    model = VideoModel.initialize(tiny_model_config.model_copy(update={"variant": CellVariant.LSTM}), seed=0)
    model.named_parameters()["head.w2"].data[0, 0] = np.nan
    with pytest.raises(DivergenceError) as info:
        train([_glyph_clip(MotionProgram.DIAGONAL)], model, tiny_train_config)
    assert info.value.iteration == 1
    assert "head.w2" in info.value.last_good


@pytest.mark.slow
@pytest.mark.parametrize("variant", [CellVariant.LSTM, CellVariant.CONV_ALSTM, CellVariant.VIDEOLSTM])
def test_single_clip_overfits(variant, tiny_model_config):
    model_cfg = tiny_model_config.model_copy(update={"variant": variant, "num_classes": 2})
    model = VideoModel.initialize(model_cfg, seed=0)
    clip = _glyph_clip(MotionProgram.HORIZONTAL_BOUNCE, frames=4)
    cfg = TrainConfig(learning_rate=0.01, batch_size=1, snippet_length=4, max_iterations=300, seed=0, log_every=50)
    result = train([clip], model, cfg)
    assert result.trace["loss"].iloc[-1] < 0.1
    assert result.trace["loss"].iloc[-1] < result.trace["loss"].iloc[0]
