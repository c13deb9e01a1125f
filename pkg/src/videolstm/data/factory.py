"""Factories for instantiating clip sources."""

from __future__ import annotations

from .source import ClipSource, EstimatedFlowSource, ManifestClipSource, SyntheticClipSource
from ..config import DataBackend, DataConfig, FlowSource


def create_clip_source(cfg: DataConfig) -> ClipSource:
    """Instantiate the appropriate clip source for the given configuration."""
    if cfg.backend == DataBackend.MANIFEST:
        if cfg.manifest is None:
            raise ValueError("Manifest backend selected but no 'manifest' path configured.")
        source: ClipSource = ManifestClipSource(cfg.manifest)
    else:
        source = SyntheticClipSource(cfg.synthetic)

    if cfg.flow_source == FlowSource.BLOCK_MATCHING:
        return EstimatedFlowSource(source, cfg.block_size, cfg.search_radius)
    return source
