"""
Configuration models for videolstm.

Model shape, optimisation, data generation, localization and evaluation
settings live here so experiments can be re-run from a single resolved file.
"""

from __future__ import annotations

import json
from enum import Enum
from pathlib import Path
from typing import Any, List, Mapping, Optional

from pydantic import BaseModel, Field, model_validator

ENCODER_STRIDE = 4


class CellVariant(str, Enum):
    """Recurrent architectures that can be trained and compared."""

    CONVNET = "convnet"
    LSTM = "lstm"
    ALSTM = "alstm"
    MOTION_ALSTM = "motion_alstm"
    CONV_LSTM = "conv_lstm"
    CONV_ALSTM = "conv_alstm"
    VIDEOLSTM = "videolstm"

    @property
    def has_attention(self) -> bool:
        return self in (
            CellVariant.ALSTM,
            CellVariant.MOTION_ALSTM,
            CellVariant.CONV_ALSTM,
            CellVariant.VIDEOLSTM,
        )

    @property
    def uses_motion(self) -> bool:
        return self in (CellVariant.MOTION_ALSTM, CellVariant.VIDEOLSTM)

    @property
    def is_convolutional(self) -> bool:
        return self in (CellVariant.CONV_LSTM, CellVariant.CONV_ALSTM, CellVariant.VIDEOLSTM)


class Stream(str, Enum):
    """Input modality feeding the appearance branch of a model."""

    RGB = "rgb"
    FLOW = "flow"


class DataBackend(str, Enum):
    """Where clips come from."""

    MANIFEST = "manifest"
    SYNTHETIC = "synthetic"


class FlowSource(str, Enum):
    """How the motion stream obtains its displacement fields."""

    ANALYTIC = "analytic"
    BLOCK_MATCHING = "block_matching"


def _require_odd(value: int, name: str) -> None:
    if value % 2 == 0:
        raise ValueError(f"{name} must be odd, got {value}")


class ModelConfig(BaseModel):
    """Architecture of the frame encoder, recurrent cell and classifier head."""

    variant: CellVariant = Field(default=CellVariant.VIDEOLSTM)
    frame_size: int = Field(default=32, gt=0, description="Frame height and width in pixels")
    frame_channels: int = Field(default=3, ge=1)
    encoder_channels: int = Field(default=8, ge=1, description="Channels of the first encoder convolution")
    feature_channels: int = Field(default=16, ge=1, description="D, channels of the encoded feature map")
    hidden_channels: int = Field(default=16, ge=1, description="K, channels of the recurrent state")
    num_classes: int = Field(default=6, ge=2)
    head_width: int = Field(default=64, gt=0)
    dropout_rate: float = Field(default=0.7, ge=0.0, lt=1.0, description="Probability of dropping a head unit")
    state_kernel: int = Field(default=3, ge=1)
    attention_kernel: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def _check_geometry(self) -> "ModelConfig":
        _require_odd(self.state_kernel, "state_kernel")
        _require_odd(self.attention_kernel, "attention_kernel")
        if self.frame_size % ENCODER_STRIDE:
            raise ValueError(
                f"frame_size {self.frame_size} must be divisible by the encoder stride {ENCODER_STRIDE}"
            )
        return self

    @property
    def grid_size(self) -> int:
        """N, the spatial extent of the feature map."""
        return self.frame_size // ENCODER_STRIDE


class TrainConfig(BaseModel):
    """RMSProp and sampling settings for back-propagation through time."""

    learning_rate: float = Field(default=0.001, ge=0.0, description="0 freezes the parameters")
    decay: float = Field(default=0.9, gt=0.0, lt=1.0)
    epsilon: float = Field(default=1e-8, gt=0.0)
    batch_size: int = Field(default=16, ge=1)
    snippet_length: int = Field(default=16, ge=1)
    max_epochs: int = Field(default=30, ge=1)
    max_iterations: Optional[int] = Field(default=None, ge=1, description="Overrides max_epochs when set")
    grad_clip_norm: Optional[float] = Field(default=5.0, gt=0.0, description="Global-norm clip; null disables")
    seed: int = Field(default=0, ge=0)
    workers: int = Field(default=1, ge=1, description="Threads computing gradients of batch chunks")
    log_every: int = Field(default=10, ge=1)
    checkpoint_every: int = Field(default=0, ge=0, description="Iterations between checkpoints; 0 only at the end")


class LocalizationConfig(BaseModel):
    """Attention-to-tube settings."""

    threshold: float = Field(default=100.0, ge=0.0, description="Saliency threshold in [0, 255] units")
    sigma: Optional[float] = Field(default=None, gt=0.0, description="Gaussian std in pixels; frame_height/14 when unset")
    span: float = Field(default=0.3, gt=0.0, le=1.0, description="Fraction of frames in each local regression")
    smooth: bool = True

    def resolved_sigma(self, frame_height: int) -> float:
        return self.sigma if self.sigma is not None else frame_height / 14.0


class EvaluationConfig(BaseModel):
    """Test-time protocol and localization metric thresholds."""

    segments: int = Field(default=25, ge=1)
    segment_length: Optional[int] = Field(default=None, ge=1, description="Defaults to the training snippet length")
    recall_thresholds: List[float] = Field(default_factory=lambda: [round(0.1 * i, 1) for i in range(1, 10)])
    map_thresholds: List[float] = Field(default_factory=lambda: [round(0.1 * i, 1) for i in range(1, 6)])

    @model_validator(mode="after")
    def _check_thresholds(self) -> "EvaluationConfig":
        for value in (*self.recall_thresholds, *self.map_thresholds):
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"IoU thresholds must lie in [0, 1], got {value}")
        return self


class SyntheticDataConfig(BaseModel):
    """Desk-scale motion-pattern dataset."""

    classes: int = Field(default=6, ge=2, le=6)
    clips_per_class: int = Field(default=50, ge=1)
    test_per_class: int = Field(default=0, ge=0)
    frames: int = Field(default=16, ge=1)
    frame_size: int = Field(default=32, gt=0)
    glyph_size: int = Field(default=8, ge=2)
    min_speed: float = Field(default=1.5, ge=0.0)
    max_speed: float = Field(default=3.0, ge=0.0)
    clutter: float = Field(default=0.0, ge=0.0, le=1.0)
    noise_sigma: float = Field(default=0.0, ge=0.0)
    seed: int = Field(default=7, ge=0)

    @model_validator(mode="after")
    def _check_ranges(self) -> "SyntheticDataConfig":
        if self.glyph_size > self.frame_size:
            raise ValueError(
                f"glyph_size {self.glyph_size} does not fit a {self.frame_size}×{self.frame_size} frame"
            )
        if self.min_speed > self.max_speed:
            raise ValueError("min_speed must not exceed max_speed")
        return self


class DataConfig(BaseModel):
    """Dataset location and motion-stream source."""

    backend: DataBackend = Field(default=DataBackend.MANIFEST)
    manifest: Optional[Path] = Field(default=Path("data/synthetic"), description="Path to manifest.json or its directory")
    flow_source: FlowSource = Field(default=FlowSource.ANALYTIC)
    block_size: int = Field(default=4, ge=1)
    search_radius: int = Field(default=4, ge=0)
    synthetic: SyntheticDataConfig = Field(default_factory=SyntheticDataConfig)


class RunConfig(BaseModel):
    """Top-level configuration container."""

    model: ModelConfig = Field(default_factory=ModelConfig)
    stream: Stream = Field(default=Stream.RGB)
    train: TrainConfig = Field(default_factory=TrainConfig)
    localization: LocalizationConfig = Field(default_factory=LocalizationConfig)
    evaluation: EvaluationConfig = Field(default_factory=EvaluationConfig)
    data: DataConfig = Field(default_factory=DataConfig)
    output_dir: Path = Field(default=Path("runs"))

    @model_validator(mode="after")
    def _check_data_fits_model(self) -> "RunConfig":
        if self.data.backend == DataBackend.SYNTHETIC:
            if self.data.synthetic.frame_size != self.model.frame_size:
                raise ValueError(
                    f"Synthetic frame_size {self.data.synthetic.frame_size} "
                    f"differs from model frame_size {self.model.frame_size}"
                )
            if self.data.synthetic.classes != self.model.num_classes:
                raise ValueError(
                    f"Synthetic dataset has {self.data.synthetic.classes} classes "
                    f"but the model predicts {self.model.num_classes}"
                )
        return self

    @classmethod
    def from_file(cls, path: Path) -> "RunConfig":
        """Load configuration from JSON or YAML."""
        import yaml

        with path.open("r", encoding="utf8") as fh:
            text = fh.read()

        for loader, suffixes in (
            (yaml.safe_load, (".yaml", ".yml")),
            (json.loads, (".json",)),
        ):
            if path.suffix.lower() in suffixes:
                data = loader(text)
                break
        else:
            data = yaml.safe_load(text)

        return cls.model_validate(data or {})

    def with_overrides(self, overrides: Mapping[str, Any]) -> "RunConfig":
        """Return a copy with dotted-path overrides applied; ``None`` values are skipped."""
        data = self.model_dump(mode="json")
        for dotted, value in overrides.items():
            if value is None:
                continue
            node = data
            *parents, leaf = dotted.split(".")
            for key in parents:
                node = node.setdefault(key, {})
            node[leaf] = value.value if isinstance(value, Enum) else value
        return type(self).model_validate(data)

    def to_json(self) -> str:
        return json.dumps(self.model_dump(mode="json"), indent=2, sort_keys=True)

    def write_resolved(self, directory: Path) -> Path:
        """Echo the fully resolved configuration into ``directory``."""
        directory.mkdir(parents=True, exist_ok=True)
        target = directory / "resolved_config.json"
        target.write_text(self.to_json() + "\n", encoding="utf8")
        return target
