"""Loading and introspecting the pretrained speech encoder."""

import math
from dataclasses import dataclass

from .errors import BridgeError

EXPECTED_RATE = 16000


@dataclass
class Encoder:
    model: object
    hidden_size: int
    n_layers: int
    hop: float


def load_encoder(model_id) -> Encoder:
    """Load a self-supervised speech encoder from a local path or hub id.

    Works with any transformers model whose config exposes the usual
    convolutional front-end metadata (HuBERT, wav2vec2 and friends).
    The frame hop is the product of the conv strides over the 16 kHz
    input rate, 20 ms for the standard base encoders.
    """
    from transformers import AutoModel

    try:
        model = AutoModel.from_pretrained(str(model_id))
    except (OSError, ValueError) as exc:
        raise BridgeError(f"model unavailable: {model_id}") from exc
    cfg = model.config
    for attr in ("hidden_size", "num_hidden_layers", "conv_stride"):
        if not hasattr(cfg, attr):
            raise BridgeError(f"model unavailable: {model_id} is not a speech encoder")
    model.eval()
    for p in model.parameters():
        p.requires_grad_(False)
    return Encoder(
        model=model,
        hidden_size=int(cfg.hidden_size),
        n_layers=int(cfg.num_hidden_layers),
        hop=math.prod(cfg.conv_stride) / EXPECTED_RATE,
    )
