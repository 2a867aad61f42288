"""Acoustic-unit discovery: k-means codebook training and frame encoding.

Frames are clustered with seeded k-means++ initialization followed by
Lloyd iterations, so a fixed seed and input order reproduce the codebook
bit for bit. Encoding assigns each frame to its nearest centroid by
squared Euclidean distance, ties broken toward the lowest index, then
optionally collapses adjacent repeats into single units.
"""

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import FileFormatError, ValidationError
from .fmtx import FrameMatrix

UCBK_MAGIC = b"UCBK"
UCBK_VERSION = 1


@dataclass(frozen=True)
class Codebook:
    """K centroids over a fixed embedding dimensionality."""

    centroids: np.ndarray
    seed: int
    source_tag: str = ""

    def __post_init__(self):
        c = np.asarray(self.centroids, dtype=np.float64)
        if c.ndim != 2 or c.shape[0] < 1:
            raise ValidationError("codebook needs a (K, dim) centroid matrix with K >= 1")
        if not np.all(np.isfinite(c)):
            raise ValidationError("codebook centroids must be finite")
        if len(np.unique(c, axis=0)) < c.shape[0]:
            raise ValidationError("codebook centroids must be pairwise distinct")
        object.__setattr__(self, "centroids", c)

    @property
    def K(self) -> int:
        return self.centroids.shape[0]

    @property
    def dim(self) -> int:
        return self.centroids.shape[1]


@dataclass(frozen=True)
class UnitSequence:
    """Discrete acoustic tokens for one utterance, each in [0, K)."""

    units: np.ndarray
    utterance_id: str = ""
    deduplicated: bool = False

    def __post_init__(self):
        u = np.asarray(self.units, dtype=np.int64)
        if self.deduplicated and len(u) > 1 and np.any(u[1:] == u[:-1]):
            raise ValidationError("deduplicated sequence has adjacent repeats")
        object.__setattr__(self, "units", u)

    def __len__(self) -> int:
        return len(self.units)


def _stack_frames(frames) -> np.ndarray:
    mats = [frames] if isinstance(frames, FrameMatrix) else list(frames)
    if not mats:
        raise ValidationError("no frame matrices given")
    dim = mats[0].dim
    for m in mats:
        if m.dim != dim:
            raise ValidationError(f"dimensionality mismatch across matrices ({m.dim} vs {dim})")
    data = np.concatenate([np.asarray(m.values, dtype=np.float64) for m in mats])
    if not np.all(np.isfinite(data)):
        raise ValidationError("non-finite values in training frames")
    return data


def _pairwise_sq_dist(points: np.ndarray, centroids: np.ndarray, chunk: int = 2048) -> np.ndarray:
    """Exact squared Euclidean distances, chunked over rows to bound memory."""
    out = np.empty((points.shape[0], centroids.shape[0]))
    for start in range(0, points.shape[0], chunk):
        block = points[start : start + chunk]
        diff = block[:, None, :] - centroids[None, :, :]
        out[start : start + chunk] = np.einsum("pkd,pkd->pk", diff, diff)
    return out


def _kmeans_pp_init(data: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = data.shape[0]
    chosen = np.empty((k, data.shape[1]))
    first = int(rng.integers(n))
    chosen[0] = data[first]
    d2 = np.sum((data - chosen[0]) ** 2, axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=d2 / total))
        chosen[j] = data[idx]
        d2 = np.minimum(d2, np.sum((data - chosen[j]) ** 2, axis=1))
    return chosen


def train_codebook(
    frames,
    k: int = 100,
    seed: int = 0,
    max_iters: int = 100,
    tol: float = 1e-6,
    source_tag: str = "",
    inertia_log: list | None = None,
) -> Codebook:
    """Cluster frame embeddings into a K-entry codebook.

    k-means++ seeding from ``seed``, Lloyd iterations until the relative
    inertia change drops below ``tol`` or ``max_iters`` is reached. A
    cluster that empties is reseeded to the point currently farthest from
    its own centroid. Deterministic for fixed seed and input order. Pass
    a list as ``inertia_log`` to capture the per-iteration inertia.
    """
    data = _stack_frames(frames)
    n = data.shape[0]
    if k < 1:
        raise ValidationError("k must be >= 1")
    if n < k:
        raise ValidationError(f"fewer points than clusters ({n} < {k})")
    if len(np.unique(data, axis=0)) < k:
        raise ValidationError("fewer distinct points than clusters")

    rng = np.random.default_rng(seed)
    centroids = _kmeans_pp_init(data, k, rng)

    prev_inertia = None
    for _ in range(max_iters):
        d2 = _pairwise_sq_dist(data, centroids)
        assign = np.argmin(d2, axis=1)
        point_d2 = d2[np.arange(n), assign]
        inertia = float(point_d2.sum())
        if inertia_log is not None:
            inertia_log.append(inertia)

        new_centroids = centroids.copy()
        for j in range(k):
            members = assign == j
            if np.any(members):
                new_centroids[j] = data[members].mean(axis=0)
            else:
                far = int(np.argmax(point_d2))
                new_centroids[j] = data[far]
                point_d2[far] = 0.0
        centroids = new_centroids

        if prev_inertia is not None:
            denom = max(prev_inertia, np.finfo(float).tiny)
            if abs(prev_inertia - inertia) / denom < tol:
                break
        prev_inertia = inertia

    return Codebook(centroids=centroids, seed=seed, source_tag=source_tag)


def kmeans_inertia(frames, cb: Codebook) -> float:
    """Total squared distance of frames to their nearest centroid."""
    data = _stack_frames(frames)
    d2 = _pairwise_sq_dist(data, cb.centroids)
    return float(d2.min(axis=1).sum())


def encode_units(m: FrameMatrix, cb: Codebook, dedup: bool = True, utterance_id: str = "") -> UnitSequence:
    """Map each frame to its nearest centroid index.

    With ``dedup``, runs of identical adjacent units collapse to one
    token, the usual convention for unit language modelling.
    """
    if m.dim != cb.dim:
        raise ValidationError(f"dimensionality mismatch (frames {m.dim}, codebook {cb.dim})")
    d2 = _pairwise_sq_dist(np.asarray(m.values, dtype=np.float64), cb.centroids)
    units = np.argmin(d2, axis=1).astype(np.int64)
    if dedup and len(units) > 1:
        keep = np.concatenate([[True], units[1:] != units[:-1]])
        units = units[keep]
    return UnitSequence(units=units, utterance_id=utterance_id, deduplicated=dedup)


def save_codebook(cb: Codebook, path) -> None:
    tag = cb.source_tag.encode("utf-8")
    header = struct.pack(
        "<4sIIIqI", UCBK_MAGIC, UCBK_VERSION, cb.K, cb.dim, cb.seed, len(tag)
    )
    payload = np.ascontiguousarray(cb.centroids, dtype="<f8").tobytes()
    Path(path).write_bytes(header + tag + payload)


def load_codebook(path) -> Codebook:
    blob = Path(path).read_bytes()
    head = struct.Struct("<4sIIIqI")
    if len(blob) < head.size:
        raise FileFormatError(f"{Path(path).name}: truncated header")
    magic, version, k, dim, seed, tag_len = head.unpack_from(blob, 0)
    if magic != UCBK_MAGIC:
        raise FileFormatError(f"{Path(path).name}: bad magic {magic!r}")
    if version != UCBK_VERSION:
        raise FileFormatError(f"{Path(path).name}: version mismatch ({version})")
    off = head.size
    tag = blob[off : off + tag_len].decode("utf-8")
    off += tag_len
    expected = off + 8 * k * dim
    if len(blob) != expected:
        raise FileFormatError(f"{Path(path).name}: truncated payload")
    centroids = np.frombuffer(blob, dtype="<f8", count=k * dim, offset=off).reshape(k, dim).copy()
    return Codebook(centroids=centroids, seed=seed, source_tag=tag)
