"""Speaker-level statistics: Pearson correlation, ICC(2,k), and
phoneme error rate.

The Pearson p-value is computed from the exact t distribution through
the regularized incomplete beta function, evaluated here with a Lentz
continued fraction so the package does not lean on a stats library for
its own reported numbers.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientDataError, ValidationError

_BETACF_MAX_ITER = 300
_BETACF_EPS = 1e-14


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta function (Lentz)."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, _BETACF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _BETACF_EPS:
            return h
    return h


def betainc_reg(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b) for a, b > 0 and x in [0, 1]."""
    if not (a > 0.0 and b > 0.0):
        raise ValidationError("beta parameters must be positive")
    if x < 0.0 or x > 1.0:
        raise ValidationError("x outside [0, 1]")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    front = math.exp(
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def student_t_two_sided_p(t: float, df: int) -> float:
    """P(|T| >= |t|) for a Student t variable with df degrees of freedom."""
    if df < 1:
        raise ValidationError("degrees of freedom must be >= 1")
    return betainc_reg(df / 2.0, 0.5, df / (df + t * t))


@dataclass(frozen=True)
class PearsonResult:
    r: float
    p: float
    n: int


def pearson(x, y) -> PearsonResult:
    """Pearson r with a two-sided p-value from the t distribution.

    Needs at least 3 paired samples and nonzero variance on both sides.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValidationError("inputs must be 1-D arrays of equal length")
    n = len(x)
    if n < 3:
        raise InsufficientDataError(f"need at least 3 pairs, got {n}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValidationError("non-finite values in correlation input")
    xd = x - x.mean()
    yd = y - y.mean()
    sx = math.sqrt(float(np.dot(xd, xd)))
    sy = math.sqrt(float(np.dot(yd, yd)))
    if sx == 0.0 or sy == 0.0:
        raise InsufficientDataError("zero variance input")
    r = float(np.dot(xd, yd)) / (sx * sy)
    r = max(-1.0, min(1.0, r))
    if abs(r) == 1.0:
        return PearsonResult(r=r, p=0.0, n=n)
    t = r * math.sqrt((n - 2) / (1.0 - r * r))
    p = student_t_two_sided_p(t, n - 2)
    return PearsonResult(r=r, p=p, n=n)


def icc_2k(ratings) -> float:
    """Two-way random, average-measures intraclass correlation.

    ``ratings`` is a complete subjects x raters matrix. The decomposition
    is the standard two-way ANOVA: between-subject, between-rater, and
    residual mean squares.
    """
    m = np.asarray(ratings, dtype=np.float64)
    if m.ndim != 2:
        raise ValidationError("ratings must be a 2-D matrix")
    n_subj, n_raters = m.shape
    if n_subj < 2 or n_raters < 2:
        raise ValidationError("need at least 2 subjects and 2 raters")
    if not np.all(np.isfinite(m)):
        raise ValidationError("ratings must be complete and finite")

    grand = m.mean()
    row_means = m.mean(axis=1)
    col_means = m.mean(axis=0)
    ss_total = float(((m - grand) ** 2).sum())
    ss_rows = n_raters * float(((row_means - grand) ** 2).sum())
    ss_cols = n_subj * float(((col_means - grand) ** 2).sum())
    ss_err = ss_total - ss_rows - ss_cols

    ms_rows = ss_rows / (n_subj - 1)
    ms_cols = ss_cols / (n_raters - 1)
    ms_err = ss_err / ((n_subj - 1) * (n_raters - 1))

    scale = max(1.0, float(np.abs(m).max()) ** 2)
    if ms_rows <= 1e-12 * scale:
        raise InsufficientDataError("undefined reliability: zero subject variance")
    denom = ms_rows + (ms_cols - ms_err) / n_subj
    if denom == 0.0:
        raise InsufficientDataError("undefined reliability: zero denominator")
    return (ms_rows - ms_err) / denom


def _tokens(seq) -> list:
    if isinstance(seq, str):
        return seq.split()
    return [str(t) for t in seq]


def phoneme_error_rate(ref, hyp) -> float:
    """Levenshtein distance over phoneme tokens divided by reference length.

    Tokens are opaque strings; strings are split on whitespace. The rate
    is not clamped, so a hypothesis much longer than the reference can
    exceed 1.
    """
    ref_t = _tokens(ref)
    hyp_t = _tokens(hyp)
    if not ref_t:
        raise ValidationError("empty reference phoneme sequence")
    prev = list(range(len(hyp_t) + 1))
    for i, r in enumerate(ref_t, start=1):
        cur = [i] + [0] * len(hyp_t)
        for j, h in enumerate(hyp_t, start=1):
            cost = 0 if r == h else 1
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost)
        prev = cur
    return prev[-1] / len(ref_t)
