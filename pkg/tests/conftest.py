import sys
from pathlib import Path

import numpy as np
import pytest

# Ensure the src directory is on sys.path for imports during testing.
src_path = Path(__file__).resolve().parents[1] / "src"
if str(src_path) not in sys.path:
    sys.path.insert(0, str(src_path))

from videolstm.config import ModelConfig, SyntheticDataConfig, TrainConfig  # noqa: E402


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def tiny_model_config() -> ModelConfig:
    """16×16 frames, N=4, small channels: fast enough for end-to-end tests."""
    return ModelConfig(
        variant="videolstm",
        frame_size=16,
        encoder_channels=3,
        feature_channels=4,
        hidden_channels=4,
        num_classes=3,
        head_width=8,
        dropout_rate=0.0,
    )


@pytest.fixture
def tiny_data_config() -> SyntheticDataConfig:
    return SyntheticDataConfig(
        classes=3,
        clips_per_class=2,
        test_per_class=1,
        frames=6,
        frame_size=16,
        glyph_size=6,
        seed=3,
    )


@pytest.fixture
def tiny_train_config() -> TrainConfig:
    return TrainConfig(batch_size=2, snippet_length=4, max_iterations=3, seed=5, log_every=1)
