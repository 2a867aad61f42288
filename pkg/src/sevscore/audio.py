"""Audio decoding, framing, and the built-in MFCC embedding front-end.

All downstream feature code assumes the canonical internal rate of 16 kHz;
``load_audio`` resamples on load so window-size constants hold everywhere.
"""

import math
import wave
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np
from scipy.fft import dct
from scipy.signal import resample_poly

from .errors import AudioFormatError

CANONICAL_RATE = 16000

MFCC_FRAME_S = 0.025
MFCC_HOP_S = 0.010
MFCC_N_MELS = 26
MFCC_FMAX = 8000.0
DEFAULT_N_COEFFS = 13


@dataclass(frozen=True)
class AudioClip:
    """Mono audio in [-1, 1) at a fixed sample rate.

    Parameters
    ----------
    samples : numpy.ndarray
        Float64 amplitudes, scaled by the source integer full scale.
    sample_rate : int
        Samples per second.
    source_id : str
        Opaque utterance identifier, usually the file stem.
    """

    samples: np.ndarray
    sample_rate: int
    source_id: str = ""

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise AudioFormatError("sample rate must be positive")
        if len(self.samples) == 0:
            raise AudioFormatError("zero-length audio")

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate


def load_audio(path, target_rate: int = CANONICAL_RATE) -> AudioClip:
    """Decode a PCM WAV file into an :class:`AudioClip` at ``target_rate``.

    Accepts 16-bit and 24-bit integer mono PCM. Samples are divided by the
    integer full scale (2^15 or 2^23). When the file rate differs from
    ``target_rate`` the signal goes through polyphase resampling with a
    windowed-sinc anti-aliasing filter.

    Raises
    ------
    AudioFormatError
        Non-PCM data, unsupported bit depth, multi-channel input, or an
        empty file.
    """
    path = Path(path)
    try:
        with wave.open(str(path), "rb") as wf:
            n_channels = wf.getnchannels()
            sampwidth = wf.getsampwidth()
            rate = wf.getframerate()
            n_frames = wf.getnframes()
            raw = wf.readframes(n_frames)
    except wave.Error as exc:
        raise AudioFormatError(f"{path.name}: non-PCM or malformed WAV ({exc})") from exc

    if n_channels != 1:
        raise AudioFormatError(f"{path.name}: multi-channel unsupported ({n_channels} channels)")
    if n_frames == 0 or len(raw) == 0:
        raise AudioFormatError(f"{path.name}: zero-length audio")

    if sampwidth == 2:
        ints = np.frombuffer(raw, dtype="<i2").astype(np.float64)
        samples = ints / 32768.0
    elif sampwidth == 3:
        as_bytes = np.frombuffer(raw, dtype=np.uint8).reshape(-1, 3)
        # sign-extend 3-byte little-endian into int32
        ints = (
            as_bytes[:, 0].astype(np.int32)
            | (as_bytes[:, 1].astype(np.int32) << 8)
            | (as_bytes[:, 2].astype(np.int32) << 16)
        )
        ints = np.where(ints >= 1 << 23, ints - (1 << 24), ints)
        samples = ints.astype(np.float64) / float(1 << 23)
    else:
        raise AudioFormatError(f"{path.name}: unsupported bit depth ({8 * sampwidth}-bit)")

    if rate != target_rate:
        ratio = Fraction(target_rate, rate)
        samples = resample_poly(samples, ratio.numerator, ratio.denominator)
        samples = np.clip(samples, -1.0, 1.0 - 2.0 ** -23)

    return AudioClip(samples=samples, sample_rate=target_rate, source_id=path.stem)


def frame_signal(clip: AudioClip, frame_len: float, hop: float, window: str = "hann") -> np.ndarray:
    """Slice ``clip`` into overlapping windowed frames.

    Returns an ``(n_frames, frame_samples)`` array where
    ``n_frames = floor((n_samples - frame_samples) / hop_samples) + 1``.

    ``window`` is ``"hann"`` or ``"rectangular"``.
    """
    if not (frame_len >= hop > 0):
        raise ValueError("need frame_len >= hop > 0")
    frame_n = int(round(frame_len * clip.sample_rate))
    hop_n = int(round(hop * clip.sample_rate))
    x = np.asarray(clip.samples, dtype=np.float64)
    if len(x) < frame_n:
        raise AudioFormatError(
            f"clip shorter than one frame ({len(x)} samples < {frame_n})"
        )
    n_frames = (len(x) - frame_n) // hop_n + 1
    idx = np.arange(frame_n)[None, :] + hop_n * np.arange(n_frames)[:, None]
    frames = x[idx]
    if window == "hann":
        frames = frames * hann_window(frame_n)
    elif window != "rectangular":
        raise ValueError(f"unknown window {window!r}")
    return frames


def hann_window(n: int) -> np.ndarray:
    # periodic form, matching common analysis practice
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(n) / n)


def mel_filterbank(n_mels: int, n_fft: int, rate: int, fmax: float) -> np.ndarray:
    """Triangular filters on the mel scale over [0, fmax], shape (n_mels, n_fft//2 + 1)."""

    def to_mel(f):
        return 2595.0 * np.log10(1.0 + f / 700.0)

    def from_mel(m):
        return 700.0 * (10.0 ** (m / 2595.0) - 1.0)

    mel_pts = np.linspace(to_mel(0.0), to_mel(fmax), n_mels + 2)
    hz_pts = from_mel(mel_pts)
    bins = np.floor((n_fft + 1) * hz_pts / rate).astype(int)
    fb = np.zeros((n_mels, n_fft // 2 + 1))
    for m in range(1, n_mels + 1):
        left, center, right = bins[m - 1], bins[m], bins[m + 1]
        for k in range(left, center):
            if center > left:
                fb[m - 1, k] = (k - left) / (center - left)
        for k in range(center, right):
            if right > center:
                fb[m - 1, k] = (right - k) / (right - center)
    return fb


def compute_mfcc(clip: AudioClip, n_coeffs: int = DEFAULT_N_COEFFS):
    """Mel-frequency cepstral coefficients as a :class:`~sevscore.fmtx.FrameMatrix`.

    25 ms hann frames at a 10 ms hop, 26 mel filters spanning 0-8 kHz, log
    filter energies, orthonormal DCT-II, first ``n_coeffs`` coefficients.
    Deterministic: identical clips give bit-identical matrices.
    """
    from .fmtx import FrameMatrix

    if not (8 <= n_coeffs <= 40):
        raise ValueError("n_coeffs must be in [8, 40]")
    frames = frame_signal(clip, MFCC_FRAME_S, MFCC_HOP_S, window="hann")
    frame_n = frames.shape[1]
    n_fft = 1 << max(9, math.ceil(math.log2(frame_n)))
    spec = np.fft.rfft(frames, n=n_fft, axis=1)
    power = np.abs(spec) ** 2
    fb = mel_filterbank(MFCC_N_MELS, n_fft, clip.sample_rate, MFCC_FMAX)
    energies = power @ fb.T
    log_e = np.log(np.maximum(energies, 1e-30))
    coeffs = dct(log_e, type=2, norm="ortho", axis=1)[:, :n_coeffs]
    return FrameMatrix(
        values=coeffs.astype(np.float32),
        hop=MFCC_HOP_S,
    )
