"""Exception hierarchy shared by the library and the CLI."""

from __future__ import annotations

from typing import Any, Dict, Optional


class VideoLSTMError(Exception):
    """Base class for all errors raised by videolstm."""


class ShapeError(VideoLSTMError, ValueError):
    """Operand extents do not agree."""


class ConfigurationError(VideoLSTMError, ValueError):
    """A configuration value is invalid for the requested operation."""


class UsageError(VideoLSTMError, ValueError):
    """An API was called with arguments outside its contract."""


class FormatError(VideoLSTMError, ValueError):
    """A file on disk does not follow the expected container format."""


class DegenerateFusionError(VideoLSTMError, ValueError):
    """Product fusion produced an all-zero distribution."""


class EmptyTubeError(VideoLSTMError, ValueError):
    """No frame of a video produced a candidate box."""


class DivergenceError(VideoLSTMError, RuntimeError):
    """Training produced a non-finite loss or gradient."""

    def __init__(
        self,
        message: str,
        *,
        iteration: int = -1,
        diagnostics: Optional[Dict[str, Any]] = None,
        last_good: Optional[Dict[str, Any]] = None,
    ) -> None:
        super().__init__(message)
        self.iteration = iteration
        self.diagnostics = diagnostics or {}
        self.last_good = last_good
