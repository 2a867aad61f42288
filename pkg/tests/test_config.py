"""Run configuration: defaults, file parsing, overrides, and hashing."""

import pytest

from sevscore.config import RunConfig, load_config
from sevscore.errors import ValidationError


def test_documented_defaults():
    cfg = RunConfig()
    assert cfg.f0_min == 75.0
    assert cfg.f0_max == 500.0
    assert cfg.voicing_threshold == 0.45
    assert cfg.silence_threshold == 0.01
    assert cfg.octave_guard == 1.3
    assert cfg.n_coeffs == 13
    assert cfg.k == 100
    assert cfg.order == 3
    assert cfg.alpha == 0.1
    assert cfg.dedup is True
    assert cfg.agg_key == "speaker-stage"
    assert cfg.embedding == "mfcc"
    assert cfg.embed_norm == "none"
    assert cfg.seed == 0


def test_validation():
    with pytest.raises(ValidationError):
        RunConfig(f0_min=500.0, f0_max=100.0)
    with pytest.raises(ValidationError, match="embedding source"):
        RunConfig(embedding="wavelet")
    with pytest.raises(ValidationError, match="normalization"):
        RunConfig(embed_norm="zscore")
    with pytest.raises(ValidationError, match="aggregation key"):
        RunConfig(agg_key="utterance")


def test_file_parsing(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text(
        "# comment line\n"
        "k = 32\n"
        "alpha = 0.5   # trailing comment\n"
        "dedup = off\n"
        "embedding = frame-matrix\n"
        "\n"
    )
    cfg = load_config(path)
    assert cfg.k == 32
    assert cfg.alpha == 0.5
    assert cfg.dedup is False
    assert cfg.embedding == "frame-matrix"
    # unspecified keys keep their defaults
    assert cfg.order == 3


def test_flags_beat_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("k = 32\nseed = 5\n")
    cfg = load_config(path, overrides={"k": 64, "alpha": None})
    assert cfg.k == 64
    assert cfg.seed == 5
    assert cfg.alpha == 0.1


def test_string_overrides_parsed(tmp_path):
    cfg = load_config(None, overrides={"dedup": "off", "k": 16})
    assert cfg.dedup is False
    assert cfg.k == 16


def test_file_errors(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("bogus_key = 1\n")
    with pytest.raises(ValidationError, match="unknown config key"):
        load_config(path)
    path.write_text("just some text\n")
    with pytest.raises(ValidationError, match="expected key = value"):
        load_config(path)
    path.write_text("dedup = maybe\n")
    with pytest.raises(ValidationError, match="expected on/off"):
        load_config(path)
    path.write_text("k = twelve\n")
    with pytest.raises(ValidationError, match="cannot parse"):
        load_config(path)


def test_hash_stable_and_sensitive():
    a = RunConfig()
    b = RunConfig()
    assert a.config_hash() == b.config_hash()
    assert len(a.config_hash()) == 16
    c = RunConfig(k=50)
    assert c.config_hash() != a.config_hash()
    d = RunConfig(dedup=False)
    assert d.config_hash() != a.config_hash()


def test_hash_covers_every_field():
    base = RunConfig().config_hash()
    for field_name, new_value in [
        ("f0_min", 80.0),
        ("f0_max", 400.0),
        ("voicing_threshold", 0.5),
        ("silence_threshold", 0.02),
        ("octave_guard", 1.5),
        ("n_coeffs", 20),
        ("k", 64),
        ("kmeans_iters", 50),
        ("kmeans_tol", 1e-5),
        ("order", 4),
        ("alpha", 0.2),
        ("dedup", False),
        ("agg_key", "speaker"),
        ("embedding", "frame-matrix"),
        ("embed_norm", "l2"),
        ("seed", 1),
    ]:
        assert RunConfig(**{field_name: new_value}).config_hash() != base, field_name
