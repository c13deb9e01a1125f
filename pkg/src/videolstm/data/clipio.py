"""Binary clip container with a JSON box sidecar.

Layout (little endian): ``b"VLSM"`` magic, one ASCII version byte, int32
``T, H, W, C, label, has_boxes``, then float32 frames ``(T, H, W, C)``, float32
flow ``(T, H, W, 2)`` and, when ``has_boxes`` is set, float32 boxes ``(T, 4)``
with ``-1`` rows for frames without a box.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import List, Optional

import numpy as np

from ..errors import FormatError
from .clip import Box, VideoClip

MAGIC = b"VLSM"
VERSION = b"1"
_HEADER = np.dtype("<i4")
_FLOAT = np.dtype("<f4")
_HEADER_FIELDS = 6


def encode_clip(clip: VideoClip) -> bytes:
    t, h, w, c = clip.frames.shape
    has_boxes = int(clip.has_boxes)
    header = np.array([t, h, w, c, clip.label, has_boxes], dtype=_HEADER)
    parts = [
        MAGIC,
        VERSION,
        header.tobytes(),
        np.ascontiguousarray(clip.frames, dtype=_FLOAT).tobytes(),
        np.ascontiguousarray(clip.flow, dtype=_FLOAT).tobytes(),
    ]
    if has_boxes:
        boxes = np.full((t, 4), -1.0, dtype=_FLOAT)
        for i, box in enumerate(clip.boxes):
            if box is not None:
                boxes[i] = box.as_tuple()
        parts.append(boxes.tobytes())
    return b"".join(parts)


def decode_clip(blob: bytes, clip_id: str = "") -> VideoClip:
    if len(blob) < len(MAGIC) + 1 or blob[: len(MAGIC)] != MAGIC:
        raise FormatError("Not a clip container: missing VLSM magic")
    version = blob[len(MAGIC) : len(MAGIC) + 1]
    if version != VERSION:
        raise FormatError(
            f"Clip container version mismatch: expected {VERSION.decode()}, found {version.decode(errors='replace')}"
        )
    offset = len(MAGIC) + 1
    header_size = _HEADER_FIELDS * _HEADER.itemsize
    if len(blob) < offset + header_size:
        raise FormatError("Truncated clip header")
    t, h, w, c, label, has_boxes = (int(v) for v in np.frombuffer(blob, _HEADER, _HEADER_FIELDS, offset))
    if min(t, h, w, c) < 1 or label < 0 or has_boxes not in (0, 1):
        raise FormatError(f"Malformed clip header: T={t} H={h} W={w} C={c} label={label} has_boxes={has_boxes}")
    offset += header_size
    counts = [t * h * w * c, t * h * w * 2, t * 4 if has_boxes else 0]
    expected = offset + sum(counts) * _FLOAT.itemsize
    if len(blob) != expected:
        raise FormatError(f"Clip payload has {len(blob)} bytes, expected {expected}")

    def take(count: int) -> np.ndarray:
        nonlocal offset
        values = np.frombuffer(blob, _FLOAT, count, offset)
        offset += count * _FLOAT.itemsize
        return values

    frames = take(counts[0]).reshape(t, h, w, c)
    flow = take(counts[1]).reshape(t, h, w, 2)
    boxes: List[Optional[Box]] = [None] * t
    if has_boxes:
        for i, row in enumerate(take(counts[2]).reshape(t, 4)):
            if not np.all(row == -1.0):
                boxes[i] = Box(*(float(v) for v in row))
    return VideoClip(frames=frames.copy(), flow=flow.copy(), boxes=boxes, label=label, clip_id=clip_id)


def sidecar_path(path: Path) -> Path:
    return Path(path).with_suffix(".json")


def write_clip(path: Path, clip: VideoClip, *, sidecar: bool = True) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_clip(clip))
    if sidecar:
        payload = {
            "clip_id": clip.clip_id or path.stem,
            "label": clip.label,
            "program": clip.program,
            "frames": clip.length,
            "height": clip.height,
            "width": clip.width,
            "boxes": clip.boxes_to_list(),
        }
        sidecar_path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf8")
    return path


def read_clip(path: Path) -> VideoClip:
    """Read a clip; the program name comes from the sidecar when one exists."""
    path = Path(path)
    clip = decode_clip(path.read_bytes(), clip_id=path.stem)
    side = sidecar_path(path)
    if side.exists():
        try:
            meta = json.loads(side.read_text(encoding="utf8"))
        except json.JSONDecodeError as exc:
            raise FormatError(f"Sidecar '{side}' is not valid JSON: {exc}") from exc
        clip.program = meta.get("program", "")
        clip.clip_id = meta.get("clip_id", clip.clip_id)
    return clip
