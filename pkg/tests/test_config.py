import json
from pathlib import Path

import pytest

from videolstm.config import (
    CellVariant,
    DataBackend,
    EvaluationConfig,
    LocalizationConfig,
    ModelConfig,
    RunConfig,
    Stream,
    SyntheticDataConfig,
    TrainConfig,
)


def test_config_from_yaml(tmp_path: Path) -> None:
    config_path = tmp_path / "config.yaml"
    config_path.write_text(
        """
model:
  variant: conv_alstm
  frame_size: 16
  num_classes: 3
stream: flow
train:
  learning_rate: 0.01
  batch_size: 4
data:
  manifest: data/demo
""",
        encoding="utf8",
    )

    cfg = RunConfig.from_file(config_path)
    assert cfg.model.variant == CellVariant.CONV_ALSTM
    assert cfg.model.grid_size == 4
    assert cfg.stream == Stream.FLOW
    assert cfg.train.learning_rate == pytest.approx(0.01)
    assert cfg.data.manifest == Path("data/demo")
    assert isinstance(cfg.localization, LocalizationConfig)


def test_config_from_json(tmp_path: Path) -> None:
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps({"evaluation": {"segments": 5}}), encoding="utf8")
    cfg = RunConfig.from_file(config_path)
    assert cfg.evaluation.segments == 5
    assert cfg.model.variant == CellVariant.VIDEOLSTM


def test_empty_config_file_gives_defaults(tmp_path: Path) -> None:
    config_path = tmp_path / "empty.yaml"
    config_path.write_text("", encoding="utf8")
    cfg = RunConfig.from_file(config_path)
    assert cfg == RunConfig()


def test_defaults() -> None:
    cfg = RunConfig()
    assert cfg.model.dropout_rate == pytest.approx(0.7)
    assert cfg.train.decay == pytest.approx(0.9)
    assert cfg.localization.threshold == pytest.approx(100.0)
    assert cfg.localization.resolved_sigma(28) == pytest.approx(2.0)
    assert LocalizationConfig(sigma=1.5).resolved_sigma(28) == pytest.approx(1.5)
    assert cfg.evaluation.recall_thresholds[0] == pytest.approx(0.1)
    assert cfg.evaluation.map_thresholds[-1] == pytest.approx(0.5)


def test_with_overrides_applies_dotted_keys() -> None:
    cfg = RunConfig().with_overrides(
        {"model.variant": CellVariant.LSTM, "train.seed": 9, "train.learning_rate": None}
    )
    assert cfg.model.variant == CellVariant.LSTM
    assert cfg.train.seed == 9
    assert cfg.train.learning_rate == pytest.approx(TrainConfig().learning_rate)


def test_with_overrides_validates() -> None:
    with pytest.raises(ValueError):
        RunConfig().with_overrides({"model.variant": "bogus"})


@pytest.mark.parametrize(
    "kwargs",
    [
        {"state_kernel": 2},
        {"attention_kernel": 4},
        {"frame_size": 30},
        {"num_classes": 1},
        {"dropout_rate": 1.0},
    ],
)
def test_model_config_rejects_invalid_geometry(kwargs) -> None:
    with pytest.raises(ValueError):
        ModelConfig(**kwargs)


def test_train_config_bounds() -> None:
    assert TrainConfig(learning_rate=0.0).learning_rate == 0.0
    with pytest.raises(ValueError):
        TrainConfig(learning_rate=-0.1)
    with pytest.raises(ValueError):
        TrainConfig(decay=1.0)


def test_synthetic_config_rejects_oversized_glyph() -> None:
    with pytest.raises(ValueError):
        SyntheticDataConfig(glyph_size=40, frame_size=32)
    with pytest.raises(ValueError):
        SyntheticDataConfig(min_speed=4.0, max_speed=2.0)


def test_evaluation_thresholds_must_be_fractions() -> None:
    with pytest.raises(ValueError):
        EvaluationConfig(recall_thresholds=[0.5, 1.5])


def test_synthetic_backend_must_match_model() -> None:
    with pytest.raises(ValueError):
        RunConfig.model_validate(
            {
                "model": {"frame_size": 32, "num_classes": 3},
                "data": {"backend": "synthetic", "synthetic": {"frame_size": 16, "classes": 3}},
            }
        )
    cfg = RunConfig.model_validate(
        {
            "model": {"frame_size": 16, "num_classes": 3},
            "data": {"backend": "synthetic", "synthetic": {"frame_size": 16, "classes": 3, "glyph_size": 6}},
        }
    )
    assert cfg.data.backend == DataBackend.SYNTHETIC


def test_write_resolved_round_trips(tmp_path: Path) -> None:
    cfg = RunConfig().with_overrides({"train.batch_size": 3})
    target = cfg.write_resolved(tmp_path / "run")
    assert target.name == "resolved_config.json"
    assert RunConfig.from_file(target) == cfg
