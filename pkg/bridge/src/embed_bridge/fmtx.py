"""Binary frame-matrix files.

Layout, all little-endian: magic ``FMTX``, version (u32), n_frames
(u64), dim (u32), frame hop in microseconds (u32), then n_frames * dim
float32 values in row-major order. This implementation is intentionally
standalone; the scoring toolkit carries its own reader and both are
pinned to the same golden fixture.
"""

import struct
from pathlib import Path

import numpy as np

from .errors import BridgeError

MAGIC = b"FMTX"
VERSION = 1
_HEADER = struct.Struct("<4sIQII")


def write_frame_matrix(path, values: np.ndarray, hop: float) -> None:
    values = np.asarray(values, dtype=np.float32)
    if values.ndim != 2:
        raise BridgeError("frame matrix must be 2-D")
    n_frames, dim = values.shape
    if n_frames < 1 or dim < 1:
        raise BridgeError("frame matrix needs n_frames >= 1 and dim >= 1")
    if not np.all(np.isfinite(values)):
        raise BridgeError("frame matrix contains non-finite values")
    if hop <= 0:
        raise BridgeError("frame hop must be positive")
    hop_us = round(hop * 1e6)
    header = _HEADER.pack(MAGIC, VERSION, n_frames, dim, hop_us)
    payload = np.ascontiguousarray(values, dtype="<f4").tobytes()
    Path(path).write_bytes(header + payload)


def read_frame_matrix(path):
    """Parse an .fmtx file, returning (values, hop_seconds)."""
    blob = Path(path).read_bytes()
    if len(blob) < _HEADER.size:
        raise BridgeError(f"{Path(path).name}: truncated header")
    magic, version, n_frames, dim, hop_us = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise BridgeError(f"{Path(path).name}: bad magic {magic!r}")
    if version != VERSION:
        raise BridgeError(f"{Path(path).name}: version mismatch ({version})")
    expected = _HEADER.size + 4 * n_frames * dim
    if len(blob) < expected:
        raise BridgeError(f"{Path(path).name}: truncated payload")
    if len(blob) > expected:
        raise BridgeError(f"{Path(path).name}: trailing bytes")
    values = np.frombuffer(blob, dtype="<f4", offset=_HEADER.size)
    return values.reshape(n_frames, dim).copy(), hop_us / 1e6
