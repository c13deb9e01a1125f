from pathlib import Path

import numpy as np
import pytest
from pydantic import ValidationError
from scipy import ndimage

from videolstm.config import DataBackend, DataConfig, FlowSource, Stream, SyntheticDataConfig
from videolstm.data import (
    Box,
    GlyphSpec,
    MotionProgram,
    VideoClip,
    block_matching_flow,
    build_dataset,
    create_clip_source,
    estimate_clip_flow,
    flow_to_image,
    generate_clip,
    generate_clips,
    image_to_flow,
    load_split,
    read_clip,
    read_manifest,
    warp_previous,
    write_clip,
)
from videolstm.data.clipio import decode_clip, encode_clip
from videolstm.data.source import EstimatedFlowSource, SyntheticClipSource
from videolstm.errors import ConfigurationError, FormatError, ShapeError
from videolstm.preprocessing import normalize_flow, normalize_frames, prepare_batch


def _clip(program=MotionProgram.HORIZONTAL_BOUNCE, steps=4, size=32, start=(10.0, 8.0), seed=0):
    spec = GlyphSpec(program=program, size=6, speed=2.0, heading=(1, 1), start=start)
    return generate_clip(spec, steps, size, size, np.random.default_rng(seed), clip_id="c0")


def test_static_flicker_has_no_motion():
    clip = _clip(MotionProgram.STATIC_FLICKER, steps=5, start=(16.0, 16.0))
    np.testing.assert_array_equal(clip.flow, 0.0)
    assert clip.frames[0].max() > clip.frames[1].max()


def test_horizontal_bounce_flow_inside_glyph():
    clip = _clip(steps=4)
    np.testing.assert_array_equal(clip.flow[0], 0.0)
    for t in range(1, 4):
        inside = clip.frames[t, ..., 0] > 0
        np.testing.assert_array_equal(clip.flow[t][inside], np.tile([2.0, 0.0], (int(inside.sum()), 1)))
        np.testing.assert_array_equal(clip.flow[t][~inside], 0.0)


def test_boxes_follow_the_trajectory():
    clip = _clip(steps=4)
    for t, box in enumerate(clip.boxes):
        assert box.center == pytest.approx((10.0 + 2.0 * t, 8.0))
        assert (box.width, box.height) == (6.0, 6.0)


def test_glyph_must_fit_the_frame():
    spec = GlyphSpec(program=MotionProgram.DIAGONAL, size=40)
    with pytest.raises(ConfigurationError):
        generate_clip(spec, 4, 32, 32, np.random.default_rng(0))
    with pytest.raises(ValidationError):
        SyntheticDataConfig(glyph_size=40, frame_size=32)


def test_every_program_renders(rng):
    for program in MotionProgram:
        clip = generate_clip(GlyphSpec(program=program, size=6), 5, 32, 32, rng)
        assert clip.label == program.label
        assert clip.frames.shape == (5, 32, 32, 3)
        assert 0.0 <= clip.frames.min() and clip.frames.max() <= 1.0
        assert all(box is not None and box.within(32, 32) for box in clip.boxes)


def test_flow_image_endpoints():
    np.testing.assert_array_equal(flow_to_image(np.zeros((2, 2, 2))), 127.5)
    np.testing.assert_array_equal(flow_to_image(np.array([8.0, -8.0, 20.0, -20.0])), [255.0, 0.0, 255.0, 0.0])
    values = np.array([-3.0, 0.5, 7.9])
    np.testing.assert_allclose(image_to_flow(flow_to_image(values)), values)
    np.testing.assert_allclose(normalize_flow(np.zeros(3)), 0.0)


def test_block_matching_on_identical_frames(rng):
    frame = rng.random((16, 16))
    np.testing.assert_array_equal(block_matching_flow(frame, frame, block=4, radius=3), 0.0)


def test_block_matching_recovers_a_shift(rng):
    previous = rng.random((24, 24))
    current = np.roll(previous, 2, axis=1)
    flow = block_matching_flow(previous, current, block=4, radius=3)
    np.testing.assert_array_equal(flow[:, 4:, 0], 2.0)
    np.testing.assert_array_equal(flow[:, 4:, 1], 0.0)
    with pytest.raises(ShapeError):
        block_matching_flow(previous, current[:20])


def _interior_flow_error(clip: VideoClip, estimated: np.ndarray) -> float:
    worst = 0.0
    for t in range(1, clip.length):
        inside = ndimage.binary_erosion(clip.frames[t, ..., 0] > 0)
        worst = max(worst, float(np.abs(estimated[t][inside] - clip.flow[t][inside]).max()))
    return worst


@pytest.mark.parametrize(
    "program",
    [
        MotionProgram.HORIZONTAL_BOUNCE,
        MotionProgram.VERTICAL_BOUNCE,
        MotionProgram.DIAGONAL,
        MotionProgram.CIRCULAR,
        MotionProgram.STATIC_FLICKER,
    ],
)
def test_block_matching_agrees_with_analytic_flow(program):
    for seed in range(5):
        clip = generate_clip(GlyphSpec(program=program, size=8, speed=2.0), 8, 32, 32, np.random.default_rng(seed))
        estimated = estimate_clip_flow(clip.frames, block=4, radius=4)
        assert _interior_flow_error(clip, estimated) <= 1.0, (program, seed)


def test_block_matching_on_an_expanding_glyph():
    # a block translation cannot follow a dilation; with both glyph edges in reach the miss stays
    # within one pixel plus the per-frame growth
    spec = GlyphSpec(program=MotionProgram.EXPANDING, size=8, speed=2.0)
    for seed in range(5):
        clip = generate_clip(spec, 8, 32, 32, np.random.default_rng(seed))
        estimated = estimate_clip_flow(clip.frames, block=4, radius=4, margin=8)
        assert _interior_flow_error(clip, estimated) <= 1.5, seed


def test_block_matching_sees_past_the_frame_edge():
    previous = np.zeros((16, 16))
    previous[4:12, 0:8] = np.linspace(0.5, 0.9, 8)
    current = np.roll(previous, 3, axis=1)
    flow = block_matching_flow(previous, current, block=4, radius=4)
    np.testing.assert_array_equal(flow[4:12, 0:4], np.tile([3.0, 0.0], (8, 4, 1)))


def test_estimated_clip_flow_first_frame_is_zero():
    clip = _clip(steps=3)
    flow = estimate_clip_flow(clip.frames, block=4, radius=3)
    assert flow.shape == clip.flow.shape
    np.testing.assert_array_equal(flow[0], 0.0)


def test_warp_previous_shifts_samples():
    previous = np.tile(np.arange(8, dtype=float), (8, 1))
    flow = np.zeros((8, 8, 2))
    flow[..., 0] = 1.0
    warped = warp_previous(previous, flow)
    np.testing.assert_allclose(warped[:, 1:], previous[:, :-1])


def test_clip_container_round_trip(tmp_path):
    clip = _clip(steps=3)
    path = write_clip(tmp_path / "clip.vlsm", clip)
    loaded = read_clip(path)
    np.testing.assert_array_equal(loaded.frames, clip.frames)
    np.testing.assert_array_equal(loaded.flow, clip.flow)
    assert loaded.boxes == clip.boxes
    assert loaded.label == clip.label
    assert loaded.program == clip.program


def test_clip_container_keeps_missing_boxes():
    clip = _clip(steps=3)
    clip.boxes[1] = None
    assert decode_clip(encode_clip(clip)).boxes == clip.boxes


def test_truncated_clip_is_rejected():
    blob = encode_clip(_clip(steps=2))
    with pytest.raises(FormatError):
        decode_clip(blob[:-3])
    with pytest.raises(FormatError):
        decode_clip(blob[:7])


def test_clip_version_mismatch_names_versions():
    blob = bytearray(encode_clip(_clip(steps=2)))
    blob[4:5] = b"7"
    with pytest.raises(FormatError, match="expected 1, found 7"):
        decode_clip(bytes(blob))
    with pytest.raises(FormatError):
        decode_clip(b"NOPE" + bytes(blob[4:]))


def test_clip_rejects_boxes_outside_the_frame():
    with pytest.raises(ShapeError):
        VideoClip(
            frames=np.zeros((1, 4, 4, 1)),
            flow=np.zeros((1, 4, 4, 2)),
            boxes=[Box(0.0, 0.0, 5.0, 2.0)],
            label=0,
        )


def test_window_pads_with_last_frame():
    clip = _clip(steps=3)
    window = clip.window(1, 4)
    assert window.length == 4
    np.testing.assert_array_equal(window.frames[2], clip.frames[2])
    np.testing.assert_array_equal(window.frames[3], clip.frames[2])
    np.testing.assert_array_equal(window.flow[3], 0.0)
    assert window.boxes[3] == clip.boxes[2]


def test_generated_dataset_is_balanced():
    cfg = SyntheticDataConfig(classes=3, clips_per_class=4, test_per_class=2, frames=4, frame_size=16, glyph_size=6)
    train = list(generate_clips(cfg, "train"))
    test = list(generate_clips(cfg, "test"))
    assert [clip.label for clip in train] == [0] * 4 + [1] * 4 + [2] * 4
    assert len(test) == 6
    assert len({clip.clip_id for clip in train + test}) == 18


def test_build_dataset_is_byte_identical_per_seed(tmp_path, tiny_data_config):
    first = build_dataset(tiny_data_config, tmp_path / "a")
    build_dataset(tiny_data_config, tmp_path / "b")
    assert first.class_counts("train") == {0: 2, 1: 2, 2: 2}
    for entry in first.clips:
        a = (tmp_path / "a" / entry.path).read_bytes()
        b = (tmp_path / "b" / entry.path).read_bytes()
        assert a == b
    assert (tmp_path / "a" / "manifest.json").read_bytes() == (tmp_path / "b" / "manifest.json").read_bytes()


def test_load_split_reads_manifest_entries(tmp_path, tiny_data_config):
    build_dataset(tiny_data_config, tmp_path)
    clips = load_split(tmp_path, "test")
    assert [clip.label for clip in clips] == [0, 1, 2]
    assert all(clip.split == "test" for clip in clips)
    assert read_manifest(tmp_path / "manifest.json").classes[0] == MotionProgram.HORIZONTAL_BOUNCE.value


def test_missing_manifest(tmp_path: Path):
    with pytest.raises(FileNotFoundError):
        read_manifest(tmp_path)


def test_clip_source_factory(tmp_path, tiny_data_config):
    synthetic = create_clip_source(DataConfig(backend=DataBackend.SYNTHETIC, synthetic=tiny_data_config))
    assert isinstance(synthetic, SyntheticClipSource)
    assert len(synthetic.load("train")) == 6
    assert synthetic.class_names() == ["horizontal_bounce", "vertical_bounce", "diagonal"]

    build_dataset(tiny_data_config, tmp_path)
    estimated = create_clip_source(
        DataConfig(manifest=tmp_path, flow_source=FlowSource.BLOCK_MATCHING, block_size=4, search_radius=2)
    )
    assert isinstance(estimated, EstimatedFlowSource)
    clips = estimated.load("test")
    assert len(clips) == 3
    np.testing.assert_array_equal(clips[0].flow[0], 0.0)

    with pytest.raises(ValueError):
        create_clip_source(DataConfig(manifest=None))


def test_prepare_batch_streams():
    clips = [_clip(steps=3, size=16, start=(5.0, 5.0)), _clip(MotionProgram.DIAGONAL, steps=3, size=16, start=(8.0, 8.0))]
    rgb = prepare_batch(clips, Stream.RGB, with_flow=True)
    assert rgb.inputs.shape == (2, 3, 16, 16, 3)
    assert rgb.flow.shape == (2, 3, 16, 16, 2)
    np.testing.assert_array_equal(rgb.labels, [0, 2])
    np.testing.assert_allclose(rgb.inputs, normalize_frames(np.stack([c.frames for c in clips])))
    flow = prepare_batch(clips, Stream.FLOW)
    assert flow.inputs.shape == (2, 3, 16, 16, 2)
    assert flow.flow is None
    with pytest.raises(ShapeError):
        prepare_batch([clips[0], _clip(steps=3, size=32)], Stream.RGB)


def test_analytic_flow_warps_previous_frame_onto_current():
    clip = _clip(steps=4)
    for t in range(1, 4):
        inside = ndimage.binary_erosion(clip.frames[t, ..., 0] > 0)
        warped = warp_previous(clip.frames[t - 1], clip.flow[t])
        np.testing.assert_allclose(warped[inside], clip.frames[t, ..., 0][inside], atol=0.02)
