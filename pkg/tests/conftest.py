"""Shared fixtures: synthetic clips and a small on-disk corpus."""

import numpy as np
import pytest

from sevscore.audio import AudioClip, CANONICAL_RATE
from sevscore import synth


@pytest.fixture
def tone_clip():
    """1 s pure 200 Hz tone at half amplitude."""
    return AudioClip(synth.sine(1.0, 200.0), CANONICAL_RATE, "tone200")


@pytest.fixture
def noise_clip():
    """1 s white noise, amplitude 0.3."""
    return AudioClip(synth.white_noise(1.0, amplitude=0.3, seed=7), CANONICAL_RATE, "noise")


@pytest.fixture
def silence_clip():
    return AudioClip(np.zeros(CANONICAL_RATE), CANONICAL_RATE, "silence")


@pytest.fixture(scope="session")
def mini_corpus(tmp_path_factory):
    """Six-speaker degradation continuum with manifests on disk.

    Session-scoped: several CLI tests reuse it read-only.
    """
    root = tmp_path_factory.mktemp("corpus")
    manifest, clean = synth.build_severity_corpus(
        root, n_speakers=6, n_utterances=2, duration=0.8, seed=3
    )
    return root, manifest, clean
