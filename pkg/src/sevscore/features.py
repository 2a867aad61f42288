"""Utterance-level voice-quality features.

Jitter and shimmer are the mean relative cycle-to-cycle variations of
period and peak amplitude (dimensionless ratios, not percent). The
remaining features reduce a per-frame series to its arithmetic mean via
``scalarize``, so every feature lands as one scalar per utterance.

Features that need voiced material raise :class:`InsufficientDataError`
instead of returning a sentinel; the evaluation harness records such
utterances as missing and excludes them pairwise.
"""

from dataclasses import dataclass

import numpy as np

from ._wada_table import DB_VALUES, G_VALUES
from .audio import AudioClip, frame_signal, hann_window
from .errors import InsufficientDataError
from .pitch import CycleSeries, PitchTrack, SILENCE_THRESHOLD, frame_autocorr_at_pitch

FEATURE_NAMES = (
    "jitter",
    "shimmer",
    "sigma_f0",
    "voicing_ratio",
    "hnr",
    "wada_snr",
    "cpp",
    "speechlm_ppl",
)

CPP_FRAME_S = 0.040
CPP_HOP_S = 0.020
CPP_PITCH_BAND_HZ = (60.0, 330.0)
HNR_CLAMP = 1e-6


@dataclass(frozen=True)
class FeatureValue:
    """One named scalar for one utterance."""

    name: str
    value: float
    utterance_id: str = ""

    def __post_init__(self):
        if self.name not in FEATURE_NAMES:
            raise ValueError(f"unknown feature name {self.name!r}")
        if not np.isfinite(self.value):
            raise ValueError(f"{self.name}: non-finite value")


def scalarize(series) -> float:
    """Arithmetic mean of a per-frame or per-cycle series."""
    arr = np.asarray(series, dtype=np.float64)
    if arr.size == 0:
        raise InsufficientDataError("cannot scalarize an empty series")
    if not np.all(np.isfinite(arr)):
        raise ValueError("non-finite member in series")
    return float(arr.mean())


def jitter(cycles: CycleSeries, utterance_id: str = "") -> FeatureValue:
    """Mean of |T_{i+1} - T_i| / T_i over consecutive cycle periods."""
    t = cycles.periods
    if len(t) < 2:
        raise InsufficientDataError("insufficient voiced cycles for jitter")
    rel = np.abs(np.diff(t)) / t[:-1]
    return FeatureValue("jitter", scalarize(rel), utterance_id)


def shimmer(cycles: CycleSeries, utterance_id: str = "") -> FeatureValue:
    """Mean of |A_{i+1} - A_i| / A_i over consecutive peak amplitudes."""
    a = cycles.amplitudes
    if len(a) < 2:
        raise InsufficientDataError("insufficient voiced cycles for shimmer")
    if np.any(a == 0.0):
        raise InsufficientDataError("degenerate amplitude (zero peak)")
    rel = np.abs(np.diff(a)) / a[:-1]
    return FeatureValue("shimmer", scalarize(rel), utterance_id)


def sigma_f0(track: PitchTrack, utterance_id: str = "") -> FeatureValue:
    """Population standard deviation of f0 over voiced frames."""
    f0 = track.f0[track.voiced]
    if len(f0) < 2:
        raise InsufficientDataError("need at least 2 voiced frames for sigma_f0")
    return FeatureValue("sigma_f0", float(np.sqrt(np.mean((f0 - f0.mean()) ** 2))), utterance_id)


def voicing_ratio(track: PitchTrack, utterance_id: str = "") -> FeatureValue:
    """Voiced frame count over total frame count."""
    n = len(track.voiced)
    if n == 0:
        raise InsufficientDataError("empty pitch track")
    return FeatureValue("voicing_ratio", track.n_voiced / n, utterance_id)


def hnr_from_autocorr(r: float) -> float:
    """Frame harmonics-to-noise ratio in dB from a normalized autocorrelation value.

    The clamp bounds frame HNR to roughly +-60 dB so pure tones stay finite.
    """
    r = min(max(r, HNR_CLAMP), 1.0 - HNR_CLAMP)
    return 10.0 * np.log10(r / (1.0 - r))


def hnr(clip: AudioClip, track: PitchTrack, utterance_id: str = "") -> FeatureValue:
    """Mean over voiced frames of the autocorrelation-derived HNR."""
    if track.n_voiced == 0:
        raise InsufficientDataError("no voiced frames for HNR")
    r = frame_autocorr_at_pitch(clip, track)
    vals = [hnr_from_autocorr(ri) for ri, v in zip(r, track.voiced) if v]
    return FeatureValue("hnr", scalarize(vals), utterance_id or clip.source_id)


def wada_snr(clip: AudioClip, utterance_id: str = "") -> FeatureValue:
    """Blind SNR estimate from the gamma-amplitude statistic.

    Computes ln(mean |x|) - mean(ln |x|) over nonzero samples and inverts
    it through the tabulated G(snr) curve with linear interpolation,
    clamping at the table endpoints (-20 and 100 dB).
    """
    x = np.abs(np.asarray(clip.samples, dtype=np.float64))
    x = x[x > 0.0]
    if x.size == 0:
        raise InsufficientDataError("all-zero clip")
    stat = np.log(x.mean()) - np.mean(np.log(x))

    if stat <= G_VALUES[0]:
        snr = DB_VALUES[0]
    elif stat >= G_VALUES[-1]:
        snr = DB_VALUES[-1]
    else:
        # last table point still below the statistic; the head of the table
        # is not strictly monotone, so bisection is not safe here
        idx = int(np.where(G_VALUES < stat)[0].max())
        g0, g1 = G_VALUES[idx], G_VALUES[idx + 1]
        frac = (stat - g0) / (g1 - g0)
        snr = DB_VALUES[idx] + frac * (DB_VALUES[idx + 1] - DB_VALUES[idx])
    return FeatureValue("wada_snr", float(snr), utterance_id or clip.source_id)


def cpp(clip: AudioClip, utterance_id: str = "", silence_threshold: float = SILENCE_THRESHOLD) -> FeatureValue:
    """Cepstral peak prominence, mean over frames above the silence gate.

    Per 40 ms hann frame: real cepstrum of the one-sided log power
    spectrum (dB), peak search over the quefrency band for 60-330 Hz
    pitch, prominence = peak height above a least-squares regression
    line over that band.
    """
    rate = clip.sample_rate
    frames = frame_signal(clip, CPP_FRAME_S, CPP_HOP_S, window="rectangular")
    rms = np.sqrt(np.mean(frames**2, axis=1))
    keep = rms >= silence_threshold
    if not np.any(keep):
        raise InsufficientDataError("no frames above silence gate")
    frames = frames[keep] * hann_window(frames.shape[1])

    n = frames.shape[1]
    nfft = 1
    while nfft < n:
        nfft *= 2
    spec = np.abs(np.fft.rfft(frames, n=nfft, axis=1)) ** 2
    log_db = 10.0 * np.log10(np.maximum(spec, 1e-30))
    # one-sided fold: positive-quefrency coefficients carry twice the
    # two-sided weight, keeping peak heights on the clinical dB scale
    ceps = 2.0 * np.fft.irfft(log_db, n=nfft, axis=1)

    q_lo = int(np.ceil(rate / CPP_PITCH_BAND_HZ[1]))
    q_hi = int(np.floor(rate / CPP_PITCH_BAND_HZ[0]))
    q_hi = min(q_hi, nfft // 2 - 1)
    quefs = np.arange(q_lo, q_hi + 1) / rate
    band = ceps[:, q_lo : q_hi + 1]

    # least-squares line per frame over the band, then peak minus line
    design = np.vstack([np.ones_like(quefs), quefs]).T
    coefs, *_ = np.linalg.lstsq(design, band.T, rcond=None)
    peak_idx = np.argmax(band, axis=1)
    peak_val = band[np.arange(len(band)), peak_idx]
    line_val = coefs[0] + coefs[1] * quefs[peak_idx]
    return FeatureValue("cpp", scalarize(peak_val - line_val), utterance_id or clip.source_id)
