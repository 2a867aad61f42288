"""Count-based n-gram language model over discrete acoustic units.

The model scores unit sequences with additive smoothing and truncation
backoff: an unseen context falls back to its shortest seen suffix, down
to the empty context. Sequences are padded with n-1 begin markers and
close with an end marker that is itself scored, so an utterance of T
units contributes T+1 scored events. Perplexity of a well-formed model
over an empty training set is exactly K+1 (the uniform distribution over
K units plus the end marker).
"""

import json
import math
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import FileFormatError, ValidationError
from .features import FeatureValue
from .units import UnitSequence

UNLM_MAGIC = b"UNLM"
UNLM_VERSION = 1

DEFAULT_ORDER = 3
DEFAULT_ALPHA = 0.1


@dataclass
class UnitLanguageModel:
    """Backoff n-gram counts over a K-unit vocabulary.

    Internal symbol ids: units are 0..K-1, the begin marker is K, the
    end marker is K+1. Begin markers appear only inside contexts; the
    scorable alphabet is the K units plus the end marker, so smoothed
    probabilities for a fixed context sum to one over K+1 symbols.
    """

    vocab_size: int
    order: int = DEFAULT_ORDER
    alpha: float = DEFAULT_ALPHA
    counts: dict = field(default_factory=dict)
    context_totals: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.vocab_size < 1:
            raise ValidationError("vocab_size must be >= 1")
        if self.order < 2:
            raise ValidationError("order must be >= 2")
        if not (self.alpha > 0.0):
            raise ValidationError("alpha must be > 0")

    @property
    def bos(self) -> int:
        return self.vocab_size

    @property
    def eos(self) -> int:
        return self.vocab_size + 1

    def prob(self, symbol: int, context: tuple) -> float:
        """Smoothed probability of ``symbol`` after ``context``.

        The context is truncated from the left until a seen context is
        found; the empty context always terminates the walk.
        """
        if not (0 <= symbol < self.vocab_size or symbol == self.eos):
            raise ValidationError(f"symbol {symbol} not scorable")
        ctx = tuple(context)
        while len(ctx) > 0 and ctx not in self.context_totals:
            ctx = ctx[1:]
        total = self.context_totals.get(ctx, 0)
        count = self.counts.get(ctx, {}).get(symbol, 0)
        denom = total + self.alpha * (self.vocab_size + 1)
        return (count + self.alpha) / denom

    def log_prob_sequence(self, units: np.ndarray) -> float:
        """Sum of natural-log probabilities over the units plus end marker."""
        units = np.asarray(units, dtype=np.int64)
        if len(units) == 0:
            raise ValidationError("empty unit sequence")
        if np.any(units < 0) or np.any(units >= self.vocab_size):
            raise ValidationError("unit id outside codebook range")
        history = [self.bos] * (self.order - 1) + [int(u) for u in units]
        events = [int(u) for u in units] + [self.eos]
        logp = 0.0
        for t, sym in enumerate(events):
            ctx = tuple(history[t : t + self.order - 1])
            logp += math.log(self.prob(sym, ctx))
        return logp


def train_unit_lm(
    sequences,
    vocab_size: int,
    order: int = DEFAULT_ORDER,
    alpha: float = DEFAULT_ALPHA,
) -> UnitLanguageModel:
    """Accumulate n-gram counts from unit sequences.

    Counts are kept for every context length from 0 to order-1 so that
    backoff can resolve at any level. Raises on an empty training set or
    out-of-range unit ids.
    """
    lm = UnitLanguageModel(vocab_size=vocab_size, order=order, alpha=alpha)
    seqs = [sequences] if isinstance(sequences, UnitSequence) else list(sequences)
    if not seqs:
        raise ValidationError("empty training set")
    for seq in seqs:
        units = np.asarray(seq.units, dtype=np.int64)
        if len(units) == 0:
            raise ValidationError(f"empty unit sequence '{seq.utterance_id}'")
        if np.any(units < 0) or np.any(units >= vocab_size):
            raise ValidationError("unit id outside codebook range")
        history = [lm.bos] * (order - 1) + [int(u) for u in units]
        events = [int(u) for u in units] + [lm.eos]
        for t, sym in enumerate(events):
            window = history[t : t + order - 1]
            for start in range(len(window) + 1):
                ctx = tuple(window[start:])
                lm.counts.setdefault(ctx, {})
                lm.counts[ctx][sym] = lm.counts[ctx].get(sym, 0) + 1
                lm.context_totals[ctx] = lm.context_totals.get(ctx, 0) + 1
    return lm


def speechlm_score(seq: UnitSequence, lm: UnitLanguageModel) -> FeatureValue:
    """Perplexity of one utterance under the unit language model.

    exp(-1/T * sum log p), with T counting the units plus the scored end
    marker. Higher perplexity means the unit stream is less predictable.
    """
    units = np.asarray(seq.units, dtype=np.int64)
    t_count = len(units) + 1
    ppl = math.exp(-lm.log_prob_sequence(units) / t_count)
    return FeatureValue("speechlm_ppl", ppl, seq.utterance_id)


def save_unit_lm(lm: UnitLanguageModel, path) -> None:
    """Serialize counts in a deterministic sorted order."""
    entries = []
    for ctx in sorted(lm.counts, key=lambda c: (len(c), c)):
        for sym in sorted(lm.counts[ctx]):
            entries.append((ctx, sym, lm.counts[ctx][sym]))
    parts = [
        struct.pack(
            "<4sIIIdQ",
            UNLM_MAGIC,
            UNLM_VERSION,
            lm.vocab_size,
            lm.order,
            lm.alpha,
            len(entries),
        )
    ]
    for ctx, sym, count in entries:
        parts.append(struct.pack(f"<B{len(ctx)}IIQ", len(ctx), *ctx, sym, count))
    Path(path).write_bytes(b"".join(parts))


def load_unit_lm(path) -> UnitLanguageModel:
    blob = Path(path).read_bytes()
    head = struct.Struct("<4sIIIdQ")
    if len(blob) < head.size:
        raise FileFormatError(f"{Path(path).name}: truncated header")
    magic, version, vocab_size, order, alpha, n_entries = head.unpack_from(blob, 0)
    if magic != UNLM_MAGIC:
        raise FileFormatError(f"{Path(path).name}: bad magic {magic!r}")
    if version != UNLM_VERSION:
        raise FileFormatError(f"{Path(path).name}: version mismatch ({version})")
    lm = UnitLanguageModel(vocab_size=vocab_size, order=order, alpha=alpha)
    off = head.size
    for _ in range(n_entries):
        if off + 1 > len(blob):
            raise FileFormatError(f"{Path(path).name}: truncated entry")
        (ctx_len,) = struct.unpack_from("<B", blob, off)
        entry = struct.Struct(f"<B{ctx_len}IIQ")
        if off + entry.size > len(blob):
            raise FileFormatError(f"{Path(path).name}: truncated entry")
        fields = entry.unpack_from(blob, off)
        off += entry.size
        ctx = tuple(fields[1 : 1 + ctx_len])
        sym, count = fields[1 + ctx_len], fields[2 + ctx_len]
        lm.counts.setdefault(ctx, {})[sym] = count
        lm.context_totals[ctx] = lm.context_totals.get(ctx, 0) + count
    if off != len(blob):
        raise FileFormatError(f"{Path(path).name}: trailing data")
    return lm


def counts_to_json(lm: UnitLanguageModel, path) -> None:
    """Human-readable diagnostic dump of the n-gram counts."""
    payload = {
        "vocab_size": lm.vocab_size,
        "order": lm.order,
        "alpha": lm.alpha,
        "counts": {
            " ".join(map(str, ctx)): {
                str(sym): lm.counts[ctx][sym] for sym in sorted(lm.counts[ctx])
            }
            for ctx in sorted(lm.counts, key=lambda c: (len(c), c))
        },
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")
