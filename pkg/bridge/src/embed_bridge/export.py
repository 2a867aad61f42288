"""Hidden-layer activation export."""

import wave
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .encoder import EXPECTED_RATE, Encoder, load_encoder
from .errors import BridgeError
from .fmtx import write_frame_matrix


@dataclass(frozen=True)
class ExportJob:
    """One wav in, one frame-matrix file out.

    ``layer_index`` selects among the encoder's hidden states: 0 is the
    convolutional front-end output, i >= 1 the output of transformer
    layer i. Layer 1 is the default because it carries the most
    severity-relevant structure in the base encoders this bridge
    targets.
    """

    wav_path: str
    out_path: str
    layer_index: int = 1
    model_id: str = ""


def read_wav_16k_mono(path) -> np.ndarray:
    """Decode a 16 kHz mono 16-bit PCM wav to float32 in [-1, 1)."""
    try:
        with wave.open(str(path), "rb") as wf:
            rate = wf.getframerate()
            if rate != EXPECTED_RATE:
                raise BridgeError(
                    f"rate mismatch: {Path(path).name} is {rate} Hz, "
                    f"encoder expects {EXPECTED_RATE}")
            if wf.getnchannels() != 1:
                raise BridgeError(f"{Path(path).name}: multi-channel unsupported")
            if wf.getsampwidth() != 2:
                raise BridgeError(f"{Path(path).name}: only 16-bit PCM supported")
            raw = wf.readframes(wf.getnframes())
    except wave.Error as exc:
        raise BridgeError(f"{Path(path).name}: not a PCM wav ({exc})") from None
    samples = np.frombuffer(raw, dtype="<i2").astype(np.float32) / 32768.0
    if samples.size == 0:
        raise BridgeError(f"{Path(path).name}: empty audio")
    return samples


def export_embeddings(job: ExportJob, encoder: Encoder | None = None) -> Path:
    """Run one clip through the encoder and write the chosen layer.

    Returns the output path. Pass a preloaded ``encoder`` when
    exporting many files; otherwise the model is loaded from
    ``job.model_id``. Inference runs without gradients, so repeated
    export of the same clip is bit-identical.
    """
    import torch

    if encoder is None:
        encoder = load_encoder(job.model_id)
    if not 0 <= job.layer_index <= encoder.n_layers:
        raise BridgeError(
            f"layer out of range: {job.layer_index} "
            f"(encoder has layers 0..{encoder.n_layers})")

    samples = read_wav_16k_mono(job.wav_path)
    with torch.inference_mode():
        out = encoder.model(torch.from_numpy(samples)[None, :],
                            output_hidden_states=True)
    values = out.hidden_states[job.layer_index][0].numpy()
    if values.shape[0] < 1:
        raise BridgeError(f"{Path(job.wav_path).name}: clip shorter than one frame")
    write_frame_matrix(job.out_path, values, encoder.hop)
    return Path(job.out_path)
