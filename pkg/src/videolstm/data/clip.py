"""Video clip and bounding-box records."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import List, Optional, Tuple

import numpy as np

from ..errors import ShapeError, UsageError


@dataclass(frozen=True)
class Box:
    """Axis-aligned box in pixel coordinates, inclusive-exclusive: ``[x0, x1) × [y0, y1)``."""

    x0: float
    y0: float
    x1: float
    y1: float

    def __post_init__(self) -> None:
        if not (self.x0 < self.x1 and self.y0 < self.y1):
            raise ValueError(f"Degenerate box ({self.x0}, {self.y0}, {self.x1}, {self.y1})")

    @property
    def width(self) -> float:
        return self.x1 - self.x0

    @property
    def height(self) -> float:
        return self.y1 - self.y0

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def center(self) -> Tuple[float, float]:
        return (0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))

    def as_tuple(self) -> Tuple[float, float, float, float]:
        return (self.x0, self.y0, self.x1, self.y1)

    def within(self, width: float, height: float) -> bool:
        return self.x0 >= 0 and self.y0 >= 0 and self.x1 <= width and self.y1 <= height

    @classmethod
    def from_center(cls, cx: float, cy: float, width: float, height: float) -> "Box":
        return cls(cx - 0.5 * width, cy - 0.5 * height, cx + 0.5 * width, cy + 0.5 * height)

    def to_dict(self) -> dict:
        return {"x0": self.x0, "y0": self.y0, "x1": self.x1, "y1": self.y1}

    @classmethod
    def from_dict(cls, data: dict) -> "Box":
        return cls(float(data["x0"]), float(data["y0"]), float(data["x1"]), float(data["y1"]))


@dataclass
class VideoClip:
    """Frames ``(T, H, W, C)`` in [0, 1], flow ``(T, H, W, 2)`` in pixels per frame, per-frame boxes."""

    frames: np.ndarray
    flow: np.ndarray
    boxes: List[Optional[Box]]
    label: int
    clip_id: str = ""
    program: str = ""
    split: str = "train"
    extra: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.frames = np.asarray(self.frames, dtype=np.float32)
        self.flow = np.asarray(self.flow, dtype=np.float32)
        if self.frames.ndim != 4:
            raise ShapeError(f"Clip frames must be (T, H, W, C), got {self.frames.shape}")
        t, h, w, _ = self.frames.shape
        if self.flow.shape != (t, h, w, 2):
            raise ShapeError(f"Clip flow {self.flow.shape} does not match frames {self.frames.shape}")
        if len(self.boxes) != t:
            raise ShapeError(f"Clip has {len(self.boxes)} boxes for {t} frames")
        for box in self.boxes:
            if box is not None and not box.within(w, h):
                raise ShapeError(f"Box {box.as_tuple()} lies outside the {w}×{h} frame")

    @property
    def length(self) -> int:
        return self.frames.shape[0]

    @property
    def height(self) -> int:
        return self.frames.shape[1]

    @property
    def width(self) -> int:
        return self.frames.shape[2]

    @property
    def channels(self) -> int:
        return self.frames.shape[3]

    @property
    def has_boxes(self) -> bool:
        return any(box is not None for box in self.boxes)

    def window(self, start: int, length: int) -> "VideoClip":
        """Contiguous sub-clip; frames past the end repeat the final frame with zero flow."""
        if self.length == 0:
            raise UsageError("Cannot take a window of an empty clip")
        if start < 0 or start >= self.length:
            raise UsageError(f"Window start {start} outside clip of length {self.length}")
        if length < 1:
            raise UsageError(f"Window length must be positive, got {length}")
        positions = np.arange(start, start + length)
        index = np.minimum(positions, self.length - 1)
        flow = self.flow[index]
        flow[positions >= self.length] = 0.0
        return replace(
            self,
            frames=self.frames[index],
            flow=flow,
            boxes=[self.boxes[i] for i in index],
        )

    def boxes_to_list(self) -> List[Optional[dict]]:
        return [box.to_dict() if box is not None else None for box in self.boxes]
