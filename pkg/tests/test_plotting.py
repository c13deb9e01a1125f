import numpy as np
import pandas as pd
import pytest

from videolstm.data import GlyphSpec, MotionProgram, generate_clip
from videolstm.localization import Tube

pytest.importorskip("matplotlib")

from videolstm.plotting import plot_localization, plot_trace  # noqa: E402


def test_plot_localization_writes_png(tmp_path):
    clip = generate_clip(GlyphSpec(MotionProgram.DIAGONAL, size=6), 4, 16, 16, np.random.default_rng(0), clip_id="c")
    tube = Tube("c", [box for box in clip.boxes], np.array([0.2, 0.8]))
    saliency = np.zeros((4, 16, 16))
    path = plot_localization(clip, saliency, tube, tmp_path / "figs" / "c.png")
    assert path.exists()
    assert path.read_bytes()[:4] == b"\x89PNG"


def test_plot_trace_writes_png(tmp_path):
    trace = pd.DataFrame({"iteration": [1, 2, 3], "loss": [1.1, 0.9, 0.7], "train_acc": [0.3, 0.5, 0.6]})
    assert plot_trace(trace, tmp_path / "trace.png").exists()
