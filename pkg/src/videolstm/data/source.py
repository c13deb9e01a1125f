"""Clip source abstractions for videolstm."""

from __future__ import annotations

import abc
import logging
from dataclasses import replace
from pathlib import Path
from typing import List

from ..config import SyntheticDataConfig
from .clip import VideoClip
from .dataset import generate_clips, load_split, read_manifest, resolve_manifest_path
from .flow import estimate_clip_flow
from .glyphs import MotionProgram

_LOGGER = logging.getLogger(__name__)


class ClipSource(abc.ABC):
    """Abstract base class for retrieving labelled clips by split."""

    @abc.abstractmethod
    def load(self, split: str) -> List[VideoClip]:
        """Return every clip of ``split`` (``train`` or ``test``)."""

    @abc.abstractmethod
    def class_names(self) -> List[str]:
        """Class names indexed by label."""


class ManifestClipSource(ClipSource):
    """Clips written by ``gen-data`` and indexed by a manifest."""

    def __init__(self, manifest: Path):
        self._path = resolve_manifest_path(manifest)
        self._manifest = read_manifest(self._path)

    @property
    def path(self) -> Path:
        return self._path

    def load(self, split: str) -> List[VideoClip]:
        return load_split(self._path, split)

    def class_names(self) -> List[str]:
        return list(self._manifest.classes)


class SyntheticClipSource(ClipSource):
    """Clips generated in memory from a :class:`SyntheticDataConfig`."""

    def __init__(self, cfg: SyntheticDataConfig):
        self._cfg = cfg

    def load(self, split: str) -> List[VideoClip]:
        return list(generate_clips(self._cfg, split))

    def class_names(self) -> List[str]:
        return [MotionProgram.from_label(label).value for label in range(self._cfg.classes)]


class EstimatedFlowSource(ClipSource):
    """Replaces the analytic flow of another source by block-matching estimates."""

    def __init__(self, inner: ClipSource, block: int, radius: int):
        self._inner = inner
        self._block = block
        self._radius = radius

    def load(self, split: str) -> List[VideoClip]:
        clips = self._inner.load(split)
        _LOGGER.info("Estimating block-matching flow for %d %s clips", len(clips), split)
        return [replace(clip, flow=estimate_clip_flow(clip.frames, self._block, self._radius)) for clip in clips]

    def class_names(self) -> List[str]:
        return self._inner.class_names()
