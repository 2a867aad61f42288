"""Additive-smoothed backoff n-gram over acoustic units, and perplexity scoring."""

import json

import numpy as np
import pytest

from sevscore.errors import FileFormatError, ValidationError
from sevscore.units import UnitSequence
from sevscore.unitlm import (
    UnitLanguageModel,
    counts_to_json,
    load_unit_lm,
    save_unit_lm,
    speechlm_score,
    train_unit_lm,
)


def _seq(units, uid="u", dedup=False):
    return UnitSequence(units=np.asarray(units, dtype=np.int64), utterance_id=uid,
                        deduplicated=dedup)


def test_smoothing_hand_value():
    # bigram over two symbols, alpha=1, trained on one sequence 0 1 0 1:
    # count(0 -> 1) = 2 and count(0 -> anything) = 2, so
    # p(1|0) = (2 + 1) / (2 + 1 * (K+1)) = 3/5
    lm = train_unit_lm([_seq([0, 1, 0, 1])], vocab_size=2, order=2, alpha=1.0)
    assert lm.prob(1, (0,)) == pytest.approx(0.6, rel=1e-15)


def test_untrained_probability_is_uniform():
    lm = UnitLanguageModel(vocab_size=4, order=3, alpha=0.1)
    # alpha / (0 + alpha * (K+1)) = 1/(K+1), independent of context
    for ctx in [(), (2,), (0, 3), (99, 99)]:
        assert lm.prob(1, ctx) == pytest.approx(0.2, rel=1e-15)
        assert lm.prob(lm.eos, ctx) == pytest.approx(0.2, rel=1e-15)


def test_untrained_perplexity_is_vocab_plus_one():
    lm = UnitLanguageModel(vocab_size=4, order=3, alpha=0.1)
    fv = speechlm_score(_seq([0, 1, 2, 3, 0], uid="x"), lm)
    # uniform over K+1 symbols; equality up to exp/log rounding
    assert fv.value == pytest.approx(5.0, rel=1e-12)
    assert fv.name == "speechlm_ppl"
    assert fv.utterance_id == "x"


def test_repetition_certainty_limit():
    # alpha -> 0 on deterministic repetition drives per-step probability
    # to 1; with N=1000 the EOS event contributes (1 + ln N)/N, so PPL
    # sits just above 1
    n = 1000
    lm = train_unit_lm([_seq([1] * n)], vocab_size=2, order=2, alpha=1e-9)
    assert lm.prob(1, (1,)) == pytest.approx(1.0, abs=2e-3)
    ppl = speechlm_score(_seq([1] * n), lm).value
    assert 1.0 < ppl < 1.01


def test_backoff_truncates_context():
    lm = train_unit_lm([_seq([0, 1, 0, 1, 0])], vocab_size=2, order=3, alpha=0.5)
    # context (1, 0) was seen; (0, 0) was not and must back off to (0,)
    seen = lm.prob(1, (1, 0))
    backed = lm.prob(1, (0, 0))
    assert backed == pytest.approx(lm.prob(1, (0,)), rel=1e-15)
    assert seen != backed


def test_context_probabilities_sum_to_one():
    rng = np.random.default_rng(0)
    seqs = [_seq(rng.integers(0, 6, size=40)) for _ in range(10)]
    lm = train_unit_lm(seqs, vocab_size=6, order=3, alpha=0.1)
    symbols = list(range(6)) + [lm.eos]
    contexts = [(), (0,), (5, 2), (lm.bos, lm.bos), (3, 3), (99, 0)]
    contexts += list(lm.context_totals)[:50]
    for ctx in contexts:
        total = sum(lm.prob(s, tuple(ctx)) for s in symbols)
        assert total == pytest.approx(1.0, abs=1e-9)


def test_all_probabilities_positive():
    lm = train_unit_lm([_seq([0, 1, 2])], vocab_size=3, order=2, alpha=0.1)
    for s in range(3):
        for ctx in [(), (0,), (2,), (1, 1)]:
            assert lm.prob(s, ctx) > 0.0


def test_ppl_at_least_one_and_finite():
    rng = np.random.default_rng(1)
    seqs = [_seq(rng.integers(0, 8, size=60), uid=str(i)) for i in range(5)]
    lm = train_unit_lm(seqs, vocab_size=8, order=3, alpha=0.1)
    for seq in seqs:
        ppl = speechlm_score(seq, lm).value
        assert np.isfinite(ppl)
        assert ppl >= 1.0


def test_structured_beats_shuffled():
    # train on strongly patterned sequences; shuffling a held-out sample
    # destroys transitions and must raise perplexity on average
    rng = np.random.default_rng(2)
    pattern = np.tile([0, 1, 2, 3], 30)
    train = [_seq(np.roll(pattern, rng.integers(4)), uid=str(i)) for i in range(8)]
    lm = train_unit_lm(train, vocab_size=4, order=3, alpha=0.1)
    test = np.roll(pattern, 1)
    base = speechlm_score(_seq(test), lm).value
    shuffled = []
    for _ in range(20):
        perm = rng.permutation(test)
        shuffled.append(speechlm_score(_seq(perm), lm).value)
    assert base < np.mean(shuffled)
    assert sum(base < s for s in shuffled) >= 19


def test_training_validation():
    with pytest.raises(ValidationError, match="empty"):
        train_unit_lm([], vocab_size=4)
    with pytest.raises(ValidationError, match="outside codebook range"):
        train_unit_lm([_seq([0, 4])], vocab_size=4)
    with pytest.raises(ValidationError, match="order"):
        train_unit_lm([_seq([0, 1])], vocab_size=4, order=1)
    with pytest.raises(ValidationError, match="alpha"):
        train_unit_lm([_seq([0, 1])], vocab_size=4, alpha=0.0)


def test_scoring_validation():
    lm = train_unit_lm([_seq([0, 1])], vocab_size=2, order=2)
    with pytest.raises(ValidationError, match="empty"):
        speechlm_score(_seq([]), lm)
    with pytest.raises(ValidationError, match="outside codebook range"):
        speechlm_score(_seq([0, 2]), lm)


def test_bos_eos_reserved_symbols():
    lm = UnitLanguageModel(vocab_size=10, order=3, alpha=0.1)
    assert lm.bos == 10
    assert lm.eos == 11


def test_roundtrip(tmp_path):
    rng = np.random.default_rng(3)
    seqs = [_seq(rng.integers(0, 5, size=30)) for _ in range(4)]
    lm = train_unit_lm(seqs, vocab_size=5, order=3, alpha=0.25)
    path = tmp_path / "m.unlm"
    save_unit_lm(lm, path)
    back = load_unit_lm(path)
    assert back.vocab_size == 5 and back.order == 3 and back.alpha == 0.25
    assert back.counts == lm.counts
    assert back.context_totals == lm.context_totals
    probe = _seq(rng.integers(0, 5, size=20))
    assert speechlm_score(probe, back).value == speechlm_score(probe, lm).value


def test_save_is_deterministic(tmp_path):
    seqs = [_seq([0, 1, 2, 1, 0])]
    a, b = tmp_path / "a.unlm", tmp_path / "b.unlm"
    save_unit_lm(train_unit_lm(seqs, vocab_size=3), a)
    save_unit_lm(train_unit_lm(seqs, vocab_size=3), b)
    assert a.read_bytes() == b.read_bytes()


def test_file_errors(tmp_path):
    lm = train_unit_lm([_seq([0, 1])], vocab_size=2, order=2)
    path = tmp_path / "m.unlm"
    save_unit_lm(lm, path)
    blob = path.read_bytes()

    bad = tmp_path / "bad.unlm"
    bad.write_bytes(b"ZZZZ" + blob[4:])
    with pytest.raises(FileFormatError, match="bad magic"):
        load_unit_lm(bad)

    bad.write_bytes(blob[:-2])
    with pytest.raises(FileFormatError, match="truncated"):
        load_unit_lm(bad)

    bad.write_bytes(blob + b"\x00")
    with pytest.raises(FileFormatError, match="trailing"):
        load_unit_lm(bad)


def test_counts_json_export(tmp_path):
    lm = train_unit_lm([_seq([0, 1, 0, 1])], vocab_size=2, order=2, alpha=1.0)
    path = tmp_path / "counts.json"
    counts_to_json(lm, path)
    data = json.loads(path.read_text())
    assert data["vocab_size"] == 2
    assert data["order"] == 2
    # count(0 -> 1) = 2 must appear under context "0"
    assert data["counts"]["0"]["1"] == 2
