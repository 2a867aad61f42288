"""Synthetic voices with known ground truth, for tests and walkthroughs.

The central generator is a raised-cosine pulse train whose per-cycle
periods and amplitudes are perturbed by a calibrated amount: an injected
relative magnitude eps is scaled so that the expected consecutive-cycle
deviation (what jitter and shimmer measure) equals eps. Pulses can be
placed at fractional sample positions (accurate periods) or snapped to
the sample grid (exact peak amplitudes).
"""

import csv
import wave
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .evaluation import MANIFEST_COLUMNS

DEFAULT_RATE = 16000

# E|z_{i+1} - z_i| for iid standard normal z is 2/sqrt(pi); dividing the
# injected eps by it makes the expected measured deviation equal eps.
_CONSECUTIVE_CAL = 2.0 / np.sqrt(np.pi)


@dataclass(frozen=True)
class SynthVoice:
    """A generated pulse train plus its ground-truth cycle data."""

    samples: np.ndarray
    rate: int
    pulse_times: np.ndarray
    periods: np.ndarray
    amplitudes: np.ndarray
    f0: float


def sine(duration: float, freq: float, rate: int = DEFAULT_RATE, amplitude: float = 0.5):
    t = np.arange(int(round(duration * rate))) / rate
    return amplitude * np.sin(2.0 * np.pi * freq * t)


def white_noise(duration: float, rate: int = DEFAULT_RATE, amplitude: float = 0.3, seed: int = 0):
    rng = np.random.default_rng(seed)
    return amplitude * rng.standard_normal(int(round(duration * rate)))


def impulse_train(duration: float, f0: float, rate: int = DEFAULT_RATE, amplitude: float = 1.0,
                  alternating: float | None = None):
    """Unit impulses every round(rate/f0) samples; optionally alternate
    the amplitude with ``alternating`` on odd pulses."""
    n = int(round(duration * rate))
    x = np.zeros(n)
    period = int(round(rate / f0))
    positions = np.arange(period, n - period, period)
    for j, pos in enumerate(positions):
        x[pos] = amplitude if (alternating is None or j % 2 == 0) else alternating
    return x


def pulse_voice(
    duration: float,
    f0: float,
    rate: int = DEFAULT_RATE,
    amplitude: float = 0.5,
    jitter_eps: float = 0.0,
    shimmer_eps: float = 0.0,
    seed: int = 0,
    pulse_width: float | None = None,
    integer_pulses: bool = False,
) -> SynthVoice:
    """Raised-cosine pulse train with calibrated cycle perturbations.

    ``jitter_eps`` and ``shimmer_eps`` are the target expected relative
    consecutive-cycle deviations. Perturbation draws are clipped at three
    sigma so consecutive period ratios stay far below the octave guard.
    With ``integer_pulses`` the pulse centers snap to the sample grid,
    making peak amplitudes exact at the cost of quantized periods.
    """
    rng = np.random.default_rng(seed)
    t0 = 1.0 / f0
    width = pulse_width if pulse_width is not None else 0.5 * t0
    if width >= t0 * (1.0 - 4.0 * jitter_eps):
        raise ValueError("pulse width must leave room between cycles")

    margin = 0.05
    centers = []
    t = margin + width / 2.0
    while t < duration - margin - width / 2.0:
        centers.append(t)
        z = float(np.clip(rng.standard_normal(), -3.0, 3.0))
        t += t0 * (1.0 + jitter_eps / _CONSECUTIVE_CAL * z)
    centers = np.asarray(centers)
    if integer_pulses:
        centers = np.round(centers * rate) / rate

    v = np.clip(rng.standard_normal(len(centers)), -3.0, 3.0)
    amps = amplitude * (1.0 + shimmer_eps / _CONSECUTIVE_CAL * v)
    amps = np.maximum(amps, 0.05 * amplitude)

    n = int(round(duration * rate))
    x = np.zeros(n)
    half = width / 2.0
    for c, a in zip(centers, amps):
        lo = max(0, int(np.ceil((c - half) * rate)))
        hi = min(n - 1, int(np.floor((c + half) * rate)))
        tt = np.arange(lo, hi + 1) / rate - c
        x[lo : hi + 1] += a * 0.5 * (1.0 + np.cos(np.pi * tt / half))
    return SynthVoice(
        samples=x,
        rate=rate,
        pulse_times=centers,
        periods=np.diff(centers),
        amplitudes=amps,
        f0=f0,
    )


def add_noise(x: np.ndarray, snr_db: float, seed: int = 0) -> np.ndarray:
    """Mix in white Gaussian noise at the given SNR relative to x's RMS."""
    rms = float(np.sqrt(np.mean(np.asarray(x) ** 2)))
    if rms == 0.0:
        raise ValueError("cannot set an SNR against a silent signal")
    sigma = rms * 10.0 ** (-snr_db / 20.0)
    rng = np.random.default_rng(seed)
    return np.asarray(x) + sigma * rng.standard_normal(len(x))


def gamma_amplitude_signal(n: int, shape: float = 0.4, seed: int = 0) -> np.ndarray:
    """Random-sign gamma-distributed amplitudes, normalized to unit RMS.

    Matches the amplitude-distribution assumption behind the blind SNR
    estimator, so the estimator's statistic is exercised on-model.
    """
    rng = np.random.default_rng(seed)
    mags = rng.gamma(shape, 1.0, n)
    signs = rng.choice([-1.0, 1.0], n)
    x = mags * signs
    return x / np.sqrt(np.mean(x**2))


def write_wav(path, samples: np.ndarray, rate: int = DEFAULT_RATE, bits: int = 16) -> None:
    """Write mono PCM, 16- or 24-bit, clipping to full scale."""
    x = np.asarray(samples, dtype=np.float64)
    if bits == 16:
        scaled = np.clip(np.round(x * 32768.0), -32768, 32767).astype("<i2")
        payload = scaled.tobytes()
        width = 2
    elif bits == 24:
        full = 2**23
        scaled = np.clip(np.round(x * full), -full, full - 1).astype("<i4")
        raw = scaled.tobytes()
        payload = b"".join(raw[i : i + 3] for i in range(0, len(raw), 4))
        width = 3
    else:
        raise ValueError("bits must be 16 or 24")
    with wave.open(str(path), "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(width)
        wf.setframerate(rate)
        wf.writeframes(payload)


def _write_manifest(path, rows) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(MANIFEST_COLUMNS)
        writer.writerows(rows)


def build_severity_corpus(
    root,
    n_speakers: int = 40,
    n_utterances: int = 5,
    duration: float = 1.0,
    seed: int = 0,
    clean_fraction: float = 0.2,
):
    """Synthetic corpus along a degradation continuum.

    Speaker s gets degradation index d = s/(n_speakers-1); cycle
    perturbations and additive noise grow with d, and perceptual_score
    is the negated degradation index. Writes wavs plus two manifests:
    the full corpus and the clean low-degradation subset used to train
    reference models. Returns (manifest_path, clean_manifest_path).
    """
    root = Path(root)
    wav_dir = root / "wav"
    wav_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    rows, clean_rows = [], []
    for s in range(n_speakers):
        d = s / (n_speakers - 1)
        speaker = f"spk{s:02d}"
        f0 = float(rng.uniform(95.0, 140.0))
        for u in range(n_utterances):
            uid = f"{speaker}_u{u}"
            voice = pulse_voice(
                duration,
                f0,
                jitter_eps=0.003 + 0.035 * d,
                shimmer_eps=0.003 + 0.035 * d,
                seed=int(rng.integers(2**31)),
                pulse_width=0.004,
            )
            mixed = add_noise(voice.samples, snr_db=35.0 - 23.0 * d, seed=int(rng.integers(2**31)))
            wav_path = wav_dir / f"{uid}.wav"
            write_wav(wav_path, mixed)
            row = [uid, speaker, "s1", str(wav_path), "", "", "", f"{-d:.6f}", ""]
            rows.append(row)
            if d <= clean_fraction:
                clean_rows.append(row)
    manifest = root / "manifest.csv"
    clean_manifest = root / "manifest_clean.csv"
    _write_manifest(manifest, rows)
    _write_manifest(clean_manifest, clean_rows)
    return manifest, clean_manifest


def build_noise_corpus(root, clips_per_level: int = 4, duration: float = 1.0, seed: int = 0):
    """Fixed clean voices mixed at three noise levels scored 0/1/2.

    Level 0 is near-clean (40 dB SNR), level 1 moderate (20 dB), level 2
    heavy (8 dB). Returns the manifest path.
    """
    root = Path(root)
    wav_dir = root / "wav"
    wav_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    snr_by_level = {0: 40.0, 1: 20.0, 2: 8.0}
    rows = []
    idx = 0
    for level, snr in snr_by_level.items():
        for _ in range(clips_per_level):
            uid = f"noise{idx:02d}"
            voice = pulse_voice(
                duration,
                float(rng.uniform(95.0, 140.0)),
                jitter_eps=0.004,
                shimmer_eps=0.004,
                seed=int(rng.integers(2**31)),
                pulse_width=0.004,
            )
            mixed = add_noise(voice.samples, snr_db=snr, seed=int(rng.integers(2**31)))
            wav_path = wav_dir / f"{uid}.wav"
            write_wav(wav_path, mixed)
            rows.append([uid, uid, "s1", str(wav_path), "", "", "", "0.0", str(level)])
            idx += 1
    manifest = root / "manifest.csv"
    _write_manifest(manifest, rows)
    return manifest
