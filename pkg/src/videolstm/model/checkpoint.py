"""Checkpoint directories: ``manifest.json`` plus TNSR parameter and optimizer dumps."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional

import numpy as np
from pydantic import ValidationError

from ..autodiff.serialize import read_sections, write_sections
from ..config import ModelConfig, Stream
from ..errors import FormatError
from .network import VideoModel

_LOGGER = logging.getLogger(__name__)

CHECKPOINT_VERSION = 1
MANIFEST_NAME = "manifest.json"
PARAMS_NAME = "params.tnsr"
OPTIMIZER_NAME = "optimizer.tnsr"


@dataclass
class Checkpoint:
    """A loaded checkpoint."""

    model: VideoModel
    path: Path
    iteration: int = 0
    optimizer_state: Dict[str, np.ndarray] = field(default_factory=dict)
    manifest: Dict[str, Any] = field(default_factory=dict)


def save_checkpoint(
    directory: Path,
    model: VideoModel,
    *,
    iteration: int = 0,
    optimizer_state: Optional[Mapping[str, np.ndarray]] = None,
    extra: Optional[Mapping[str, Any]] = None,
) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    arrays = model.state_arrays()
    cfg = model.config
    manifest: Dict[str, Any] = {
        "format_version": CHECKPOINT_VERSION,
        "variant": cfg.variant.value,
        "stream": model.stream.value,
        "N": cfg.grid_size,
        "C": cfg.frame_channels,
        "D": cfg.feature_channels,
        "K": cfg.hidden_channels,
        "num_classes": cfg.num_classes,
        "model": cfg.model_dump(mode="json"),
        "parameters": list(arrays),
        "iteration": int(iteration),
    }
    if extra:
        manifest.update(extra)
    write_sections(directory / PARAMS_NAME, arrays)
    if optimizer_state:
        write_sections(directory / OPTIMIZER_NAME, optimizer_state)
    (directory / MANIFEST_NAME).write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf8")
    _LOGGER.info("Saved checkpoint at iteration %d to %s", iteration, directory)
    return directory


def read_manifest(directory: Path) -> Dict[str, Any]:
    path = Path(directory) / MANIFEST_NAME
    if not path.exists():
        raise FileNotFoundError(f"Checkpoint manifest '{path}' not found")
    try:
        manifest = json.loads(path.read_text(encoding="utf8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"Checkpoint manifest '{path}' is not valid JSON: {exc}") from exc
    found = manifest.get("format_version")
    if found != CHECKPOINT_VERSION:
        raise FormatError(f"Checkpoint format version mismatch: expected {CHECKPOINT_VERSION}, found {found}")
    return manifest


def load_checkpoint(directory: Path) -> Checkpoint:
    directory = Path(directory)
    manifest = read_manifest(directory)
    try:
        config = ModelConfig.model_validate(manifest["model"])
        stream = Stream(manifest["stream"])
    except (KeyError, ValueError, ValidationError) as exc:
        raise FormatError(f"Checkpoint manifest in '{directory}' is incomplete: {exc}") from exc
    arrays = read_sections(directory / PARAMS_NAME)
    missing = [name for name in manifest.get("parameters", []) if name not in arrays]
    if missing:
        raise FormatError(f"Checkpoint '{directory}' lacks parameter sections {missing}")
    model = VideoModel.from_arrays(config, stream, arrays)
    optimizer_path = directory / OPTIMIZER_NAME
    optimizer_state = read_sections(optimizer_path) if optimizer_path.exists() else {}
    _LOGGER.debug("Loaded %s checkpoint from %s", config.variant.value, directory)
    return Checkpoint(
        model=model,
        path=directory,
        iteration=int(manifest.get("iteration", 0)),
        optimizer_state=optimizer_state,
        manifest=manifest,
    )


def transfer_parameters(model: VideoModel, arrays: Mapping[str, np.ndarray]) -> List[str]:
    """Copy every array whose name and shape match a parameter of ``model``; returns the copied names."""
    copied = []
    for key, tensor in model.named_parameters().items():
        value = arrays.get(key)
        if value is None or np.shape(value) != tensor.shape:
            continue
        tensor.data = np.array(value, dtype=np.float64)
        copied.append(key)
    skipped = len(model.named_parameters()) - len(copied)
    _LOGGER.info("Initialised %d parameters from checkpoint, %d left at their initial values", len(copied), skipped)
    return copied
