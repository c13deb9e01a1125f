"""
videolstm package.

Convolutional, attention and motion-attention recurrent video classifiers
with attention-based action localization, organised by concern.
"""

from .config import CellVariant, RunConfig, Stream
from .model import VideoModel

__all__ = ["CellVariant", "RunConfig", "Stream", "VideoModel"]
