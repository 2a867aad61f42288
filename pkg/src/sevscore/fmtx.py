"""Bit-exact frame-matrix interchange format ("FMTX").

Byte layout, little-endian throughout:

    offset 0   magic ASCII "FMTX"
    offset 4   version, u32 (currently 1)
    offset 8   n_frames, u64
    offset 16  dim, u32
    offset 20  hop in microseconds, u32
    offset 24  n_frames * dim float32 values, row-major

No padding, no trailing data. This is the contract between the embedding
exporter and the unit pipeline, so reads and writes must round-trip the
payload bytes exactly.
"""

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import FileFormatError, ValidationError

MAGIC = b"FMTX"
VERSION = 1
_HEADER = struct.Struct("<4sIQII")


@dataclass(frozen=True)
class FrameMatrix:
    """Per-frame embedding rows: ``values[t]`` is the frame at ``t * hop`` seconds."""

    values: np.ndarray
    hop: float

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float32)
        if v.ndim != 2:
            raise ValidationError("frame matrix must be 2-D")
        if v.shape[0] < 1 or v.shape[1] < 1:
            raise ValidationError("frame matrix needs n_frames >= 1 and dim >= 1")
        if not np.all(np.isfinite(v)):
            raise ValidationError("frame matrix contains non-finite values")
        if not self.hop > 0:
            raise ValidationError("frame hop must be positive")
        object.__setattr__(self, "values", v)

    @property
    def n_frames(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]


def write_frame_matrix(m: FrameMatrix, path) -> None:
    """Serialize ``m`` so that ``read_frame_matrix`` recovers it bit-exactly."""
    header = _HEADER.pack(MAGIC, VERSION, m.n_frames, m.dim, round(m.hop * 1e6))
    payload = np.ascontiguousarray(m.values, dtype="<f4").tobytes()
    Path(path).write_bytes(header + payload)


def read_frame_matrix(path) -> FrameMatrix:
    """Parse an FMTX file, validating magic, version, and payload size."""
    blob = Path(path).read_bytes()
    if len(blob) < _HEADER.size:
        raise FileFormatError(f"{Path(path).name}: truncated header")
    magic, version, n_frames, dim, hop_us = _HEADER.unpack_from(blob, 0)
    if magic != MAGIC:
        raise FileFormatError(f"{Path(path).name}: bad magic {magic!r}")
    if version != VERSION:
        raise FileFormatError(f"{Path(path).name}: version mismatch ({version})")
    if dim == 0:
        raise FileFormatError(f"{Path(path).name}: dim = 0")
    expected = _HEADER.size + 4 * n_frames * dim
    if len(blob) < expected:
        raise FileFormatError(f"{Path(path).name}: truncated payload")
    if len(blob) > expected:
        raise FileFormatError(f"{Path(path).name}: trailing data after payload")
    values = np.frombuffer(blob, dtype="<f4", count=n_frames * dim, offset=_HEADER.size)
    values = values.reshape(n_frames, dim).copy()
    if not np.all(np.isfinite(values)):
        raise FileFormatError(f"{Path(path).name}: non-finite values in payload")
    return FrameMatrix(values=values, hop=hop_us / 1e6)
