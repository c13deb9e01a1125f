"""TNSR dumps: ``TNSR <ndim> <extents...>`` header line, then little-endian float64 data.

Multi-tensor files prefix each dump with a ``SECTION <name>`` line.
"""

from __future__ import annotations

import io
from pathlib import Path
from typing import BinaryIO, Dict, Mapping

import numpy as np

from ..errors import FormatError

MAGIC = b"TNSR"
SECTION = b"SECTION"
_DTYPE = np.dtype("<f8")


def _read_line(fh: BinaryIO, what: str) -> bytes:
    line = fh.readline()
    if not line.endswith(b"\n"):
        raise FormatError(f"Truncated {what} header")
    return line[:-1]


def dump_tensor(array: np.ndarray, fh: BinaryIO) -> None:
    data = np.ascontiguousarray(array, dtype=_DTYPE)
    extents = " ".join(str(int(e)) for e in data.shape)
    header = f"TNSR {data.ndim}" + (f" {extents}" if extents else "")
    fh.write(header.encode("ascii") + b"\n")
    fh.write(data.tobytes(order="C"))


def load_tensor(fh: BinaryIO) -> np.ndarray:
    fields = _read_line(fh, "tensor").split()
    if not fields or fields[0] != MAGIC:
        raise FormatError(f"Expected TNSR header, found {fields[:1]!r}")
    try:
        ndim = int(fields[1])
        shape = tuple(int(x) for x in fields[2:])
    except (IndexError, ValueError) as exc:
        raise FormatError(f"Malformed TNSR header: {b' '.join(fields)!r}") from exc
    if len(shape) != ndim or any(e < 0 for e in shape):
        raise FormatError(f"TNSR header declares {ndim} dims but lists extents {shape}")
    count = int(np.prod(shape)) if shape else 1
    payload = fh.read(count * _DTYPE.itemsize)
    if len(payload) != count * _DTYPE.itemsize:
        raise FormatError(f"Truncated TNSR payload: expected {count} values")
    return np.frombuffer(payload, dtype=_DTYPE).reshape(shape).astype(np.float64)


def write_tensor(path: Path, array: np.ndarray) -> None:
    with Path(path).open("wb") as fh:
        dump_tensor(array, fh)


def read_tensor(path: Path) -> np.ndarray:
    with Path(path).open("rb") as fh:
        return load_tensor(fh)


def dumps_sections(tensors: Mapping[str, np.ndarray]) -> bytes:
    buffer = io.BytesIO()
    for name, array in tensors.items():
        if not name or any(ch.isspace() for ch in name):
            raise FormatError(f"Section names must be non-empty without whitespace: {name!r}")
        buffer.write(SECTION + b" " + name.encode("utf8") + b"\n")
        dump_tensor(array, buffer)
    return buffer.getvalue()


def loads_sections(blob: bytes) -> Dict[str, np.ndarray]:
    fh = io.BytesIO(blob)
    tensors: Dict[str, np.ndarray] = {}
    while fh.tell() < len(blob):
        fields = _read_line(fh, "section").split(maxsplit=1)
        if len(fields) != 2 or fields[0] != SECTION:
            raise FormatError(f"Expected SECTION line, found {b' '.join(fields)!r}")
        name = fields[1].decode("utf8")
        if name in tensors:
            raise FormatError(f"Duplicate section '{name}'")
        tensors[name] = load_tensor(fh)
    return tensors


def write_sections(path: Path, tensors: Mapping[str, np.ndarray]) -> None:
    Path(path).write_bytes(dumps_sections(tensors))


def read_sections(path: Path) -> Dict[str, np.ndarray]:
    return loads_sections(Path(path).read_bytes())
