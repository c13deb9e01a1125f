"""Balanced synthetic datasets and their JSON manifest."""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Dict, Iterator, List

import numpy as np
from pydantic import BaseModel, Field, ValidationError

from ..config import SyntheticDataConfig
from ..errors import FormatError
from .clip import VideoClip
from .clipio import read_clip, write_clip
from .glyphs import MotionProgram, generate_clip, random_glyph_spec

_LOGGER = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
MANIFEST_VERSION = 1
SPLITS = ("train", "test")
CLIP_SUFFIX = ".vlsm"


class ManifestEntry(BaseModel):
    """One clip on disk."""

    clip_id: str
    path: str = Field(..., description="Path relative to the manifest directory")
    label: int = Field(..., ge=0)
    program: str
    split: str


class DatasetManifest(BaseModel):
    """Index of a generated dataset."""

    format_version: int = MANIFEST_VERSION
    classes: List[str]
    frames: int
    frame_size: int
    seed: int
    clips: List[ManifestEntry] = Field(default_factory=list)

    def entries(self, split: str) -> List[ManifestEntry]:
        return [entry for entry in self.clips if entry.split == split]

    def class_counts(self, split: str) -> Dict[int, int]:
        counts = {label: 0 for label in range(len(self.classes))}
        for entry in self.entries(split):
            counts[entry.label] += 1
        return counts

    def write(self, directory: Path) -> Path:
        target = Path(directory) / MANIFEST_NAME
        target.write_text(json.dumps(self.model_dump(mode="json"), indent=2) + "\n", encoding="utf8")
        return target


def resolve_manifest_path(path: Path) -> Path:
    path = Path(path)
    return path / MANIFEST_NAME if path.is_dir() else path


def read_manifest(path: Path) -> DatasetManifest:
    target = resolve_manifest_path(path)
    if not target.exists():
        raise FileNotFoundError(f"Dataset manifest '{target}' not found")
    try:
        manifest = DatasetManifest.model_validate_json(target.read_text(encoding="utf8"))
    except ValidationError as exc:
        raise FormatError(f"Dataset manifest '{target}' is malformed: {exc}") from exc
    if manifest.format_version != MANIFEST_VERSION:
        raise FormatError(
            f"Dataset manifest version mismatch: expected {MANIFEST_VERSION}, found {manifest.format_version}"
        )
    return manifest


def _clip_rng(seed: int, split: str, label: int, index: int) -> np.random.Generator:
    return np.random.default_rng([seed, SPLITS.index(split), label, index])


def generate_clips(cfg: SyntheticDataConfig, split: str = "train") -> Iterator[VideoClip]:
    """Yield ``clips_per_class`` (train) or ``test_per_class`` (test) clips of every class in label order."""
    if split not in SPLITS:
        raise ValueError(f"Unknown split '{split}', expected one of {SPLITS}")
    per_class = cfg.clips_per_class if split == "train" else cfg.test_per_class
    for label in range(cfg.classes):
        program = MotionProgram.from_label(label)
        for index in range(per_class):
            rng = _clip_rng(cfg.seed, split, label, index)
            spec = random_glyph_spec(program, rng, cfg)
            clip_id = f"{split}_{program.value}_{index:04d}"
            clip = generate_clip(spec, cfg.frames, cfg.frame_size, cfg.frame_size, rng, clip_id=clip_id)
            clip.split = split
            yield clip


def build_dataset(cfg: SyntheticDataConfig, out_dir: Path) -> DatasetManifest:
    """Write every clip and the manifest below ``out_dir``."""
    out_dir = Path(out_dir)
    (out_dir / "clips").mkdir(parents=True, exist_ok=True)
    manifest = DatasetManifest(
        classes=[MotionProgram.from_label(label).value for label in range(cfg.classes)],
        frames=cfg.frames,
        frame_size=cfg.frame_size,
        seed=cfg.seed,
    )
    for split in SPLITS:
        for clip in generate_clips(cfg, split):
            relative = f"clips/{clip.clip_id}{CLIP_SUFFIX}"
            write_clip(out_dir / relative, clip)
            manifest.clips.append(
                ManifestEntry(
                    clip_id=clip.clip_id,
                    path=relative,
                    label=clip.label,
                    program=clip.program,
                    split=split,
                )
            )
    manifest.write(out_dir)
    _LOGGER.info("Wrote %d clips (%d classes) to %s", len(manifest.clips), cfg.classes, out_dir)
    return manifest


def load_split(manifest_path: Path, split: str) -> List[VideoClip]:
    manifest_file = resolve_manifest_path(manifest_path)
    manifest = read_manifest(manifest_file)
    clips: List[VideoClip] = []
    for entry in manifest.entries(split):
        clip = read_clip(manifest_file.parent / entry.path)
        if clip.label != entry.label:
            raise FormatError(f"Clip '{entry.clip_id}' has label {clip.label}, manifest says {entry.label}")
        clip.clip_id = entry.clip_id
        clip.program = entry.program
        clip.split = split
        clips.append(clip)
    _LOGGER.debug("Loaded %d %s clips from %s", len(clips), split, manifest_file)
    return clips
