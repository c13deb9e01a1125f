"""Synthetic clips, flow utilities, clip containers and dataset sources."""

from .clip import Box, VideoClip
from .clipio import read_clip, write_clip
from .dataset import DatasetManifest, build_dataset, generate_clips, load_split, read_manifest
from .factory import create_clip_source
from .flow import block_matching_flow, estimate_clip_flow, flow_to_image, image_to_flow, warp_previous
from .glyphs import GlyphShape, GlyphSpec, MotionProgram, generate_clip, random_glyph_spec
from .source import ClipSource

__all__ = [
    "Box",
    "ClipSource",
    "DatasetManifest",
    "GlyphShape",
    "GlyphSpec",
    "MotionProgram",
    "VideoClip",
    "block_matching_flow",
    "build_dataset",
    "create_clip_source",
    "estimate_clip_flow",
    "flow_to_image",
    "generate_clip",
    "generate_clips",
    "image_to_flow",
    "load_split",
    "random_glyph_spec",
    "read_clip",
    "read_manifest",
    "warp_previous",
    "write_clip",
]
