"""Run configuration: documented defaults, key=value file parsing, flag
overrides, and the config hash recorded in outputs.

The config file is a plain text file of ``key = value`` lines with
``#`` comments. Flags always win over the file; the file wins over
defaults. The hash is a SHA-256 digest over the sorted effective
key=value pairs, so any change that could alter results changes the
hash.
"""

import hashlib
from dataclasses import dataclass, fields, replace
from pathlib import Path

from .audio import DEFAULT_N_COEFFS
from .errors import ValidationError
from .pitch import (
    DEFAULT_F0_MAX,
    DEFAULT_F0_MIN,
    OCTAVE_GUARD_RATIO,
    SILENCE_THRESHOLD,
    VOICING_THRESHOLD,
)

EMBEDDING_MFCC = "mfcc"
EMBEDDING_FRAME_MATRIX = "frame-matrix"


@dataclass(frozen=True)
class RunConfig:
    """Every knob with its documented default."""

    f0_min: float = DEFAULT_F0_MIN
    f0_max: float = DEFAULT_F0_MAX
    voicing_threshold: float = VOICING_THRESHOLD
    silence_threshold: float = SILENCE_THRESHOLD
    octave_guard: float = OCTAVE_GUARD_RATIO
    n_coeffs: int = DEFAULT_N_COEFFS
    k: int = 100
    kmeans_iters: int = 100
    kmeans_tol: float = 1e-6
    order: int = 3
    alpha: float = 0.1
    dedup: bool = True
    agg_key: str = "speaker-stage"
    embedding: str = EMBEDDING_MFCC
    embed_norm: str = "none"
    seed: int = 0

    def __post_init__(self):
        if not (0 < self.f0_min < self.f0_max):
            raise ValidationError("need 0 < f0_min < f0_max")
        if self.embedding not in (EMBEDDING_MFCC, EMBEDDING_FRAME_MATRIX):
            raise ValidationError(f"unknown embedding source '{self.embedding}'")
        if self.embed_norm not in ("none", "l2"):
            raise ValidationError(f"unknown embedding normalization '{self.embed_norm}'")
        if self.agg_key not in ("speaker", "speaker-stage"):
            raise ValidationError(f"unknown aggregation key '{self.agg_key}'")

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def config_hash(self) -> str:
        """First 16 hex chars of the SHA-256 over sorted key=value lines."""
        text = "\n".join(f"{k}={_fmt(v)}" for k, v in sorted(self.as_dict().items()))
        return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "on" if value else "off"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse_value(name: str, raw: str, target_type: type):
    raw = raw.strip()
    if target_type is bool:
        if raw in ("on", "true", "1", "yes"):
            return True
        if raw in ("off", "false", "0", "no"):
            return False
        raise ValidationError(f"config key '{name}': expected on/off, got {raw!r}")
    try:
        return target_type(raw)
    except ValueError:
        raise ValidationError(f"config key '{name}': cannot parse {raw!r}") from None


def load_config(path=None, overrides: dict | None = None) -> RunConfig:
    """Build the effective config from defaults, an optional file, and
    flag overrides, in that precedence order."""
    values: dict = {}
    field_types = {f.name: type(getattr(RunConfig(), f.name)) for f in fields(RunConfig)}
    if path is not None:
        for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValidationError(f"{Path(path).name}:{lineno}: expected key = value")
            name, raw = (part.strip() for part in line.split("=", 1))
            if name not in field_types:
                raise ValidationError(f"{Path(path).name}:{lineno}: unknown config key '{name}'")
            values[name] = _parse_value(name, raw, field_types[name])
    for name, value in (overrides or {}).items():
        if value is None:
            continue
        if name not in field_types:
            raise ValidationError(f"unknown config key '{name}'")
        if isinstance(value, str):
            value = _parse_value(name, value, field_types[name])
        values[name] = value
    return replace(RunConfig(), **values) if values else RunConfig()
