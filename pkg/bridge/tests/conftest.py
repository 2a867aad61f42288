import wave

import numpy as np
import pytest


def write_wav(path, samples, rate=16000):
    quantized = np.clip(np.round(np.asarray(samples) * 32768.0), -32768, 32767)
    with wave.open(str(path), "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(2)
        wf.setframerate(rate)
        wf.writeframes(quantized.astype("<i2").tobytes())


@pytest.fixture(scope="session")
def encoder_dir(tmp_path_factory):
    """A small randomly initialized base-width encoder saved locally."""
    import torch
    from transformers import HubertConfig, HubertModel

    torch.manual_seed(0)
    cfg = HubertConfig(hidden_size=768, num_hidden_layers=2,
                       num_attention_heads=12, intermediate_size=1024)
    model = HubertModel(cfg)
    out = tmp_path_factory.mktemp("encoder")
    model.save_pretrained(out)
    return out


@pytest.fixture(scope="session")
def wav_dir(tmp_path_factory):
    """Four deterministic 1 s clips at 16 kHz."""
    out = tmp_path_factory.mktemp("wavs")
    rng = np.random.default_rng(5)
    t = np.arange(16000) / 16000.0
    for i in range(4):
        tone = 0.4 * np.sin(2 * np.pi * (150 + 40 * i) * t)
        noise = 0.05 * rng.standard_normal(16000)
        write_wav(out / f"utt{i}.wav", tone + noise)
    return out
