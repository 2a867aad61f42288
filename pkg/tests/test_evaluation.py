"""Manifest ingestion, speaker-level aggregation, and report emission."""

import numpy as np
import pytest

from sevscore.errors import ValidationError
from sevscore.evaluation import (
    AGG_SPEAKER,
    AGG_SPEAKER_STAGE,
    CorrelationReport,
    MANIFEST_COLUMNS,
    ReportRow,
    aggregate_scores,
    correlate_features,
    emit_report,
    load_manifest,
    render_p,
)

HEADER = ",".join(MANIFEST_COLUMNS)


def _write_manifest(path, rows):
    path.write_text(HEADER + "\n" + "\n".join(rows) + "\n", encoding="utf-8")
    return path


def _basic_manifest(tmp_path):
    return _write_manifest(
        tmp_path / "m.csv",
        [
            "u1,spkA,s1,a.wav,,,,-1.5,0",
            "u2,spkA,s1,b.wav,,,,-1.5,0",
            "u3,spkB,s1,c.wav,,,,-2.5,1",
            "u4,spkB,s2,d.wav,,,,-3.0,2",
        ],
    )


# --------------------------------------------------------------- loading


def test_load_basic(tmp_path):
    man = load_manifest(_basic_manifest(tmp_path))
    assert len(man.rows) == 4
    row = man.row("u3")
    assert row.speaker_id == "spkB"
    assert row.perceptual_score == -2.5
    assert row.noise_score == 1
    assert man.row("u1").frame_matrix_path is None


def test_load_wrong_header(tmp_path):
    path = tmp_path / "m.csv"
    path.write_text("utterance_id,speaker\nu1,a\n")
    with pytest.raises(ValidationError, match="missing required column"):
        load_manifest(path)


def test_load_duplicate_id(tmp_path):
    path = _write_manifest(
        tmp_path / "m.csv",
        ["u1,spkA,s1,a.wav,,,,1.0,", "u1,spkA,s1,b.wav,,,,1.0,"],
    )
    with pytest.raises(ValidationError, match="u1"):
        load_manifest(path)


def test_load_bad_score(tmp_path):
    path = _write_manifest(tmp_path / "m.csv", ["u1,spkA,s1,a.wav,,,,abc,"])
    with pytest.raises(ValidationError, match="unparsable perceptual score"):
        load_manifest(path)


def test_load_noise_out_of_range(tmp_path):
    path = _write_manifest(tmp_path / "m.csv", ["u1,spkA,s1,a.wav,,,,1.0,5"])
    with pytest.raises(ValidationError, match="noise score out of range: 5"):
        load_manifest(path)


def test_load_empty_manifest(tmp_path):
    path = tmp_path / "m.csv"
    path.write_text(HEADER + "\n")
    with pytest.raises(ValidationError, match="no rows"):
        load_manifest(path)


def test_load_blank_id(tmp_path):
    path = _write_manifest(tmp_path / "m.csv", [",spkA,s1,a.wav,,,,1.0,"])
    with pytest.raises(ValidationError):
        load_manifest(path)


# ----------------------------------------------------------- aggregation


def test_aggregate_mean(tmp_path):
    man = load_manifest(_basic_manifest(tmp_path))
    agg = aggregate_scores({"u1": 2.0, "u2": 4.0, "u3": 7.0, "u4": 9.0}, man)
    assert agg.keys == (("spkA", "s1"), ("spkB", "s1"), ("spkB", "s2"))
    assert agg.feature_means == (3.0, 7.0, 9.0)
    assert agg.target_scores == (-1.5, -2.5, -3.0)
    assert agg.excluded_keys == ()


def test_aggregate_missing_value_uses_remaining(tmp_path):
    man = load_manifest(_basic_manifest(tmp_path))
    agg = aggregate_scores({"u2": 5.0, "u3": 7.0, "u4": 9.0}, man)
    # u1 missing: spkA mean falls back to the one usable utterance
    assert agg.feature_means[0] == 5.0


def test_aggregate_empty_key_dropped(tmp_path):
    man = load_manifest(_basic_manifest(tmp_path))
    agg = aggregate_scores({"u3": 7.0, "u4": 9.0}, man)
    assert ("spkA", "s1") in agg.excluded_keys
    assert len(agg.keys) == 2


def test_aggregate_speaker_key(tmp_path):
    man = load_manifest(_basic_manifest(tmp_path))
    # collapsing across stages needs a constant perceptual score per speaker
    path = _write_manifest(
        tmp_path / "m2.csv",
        [
            "u1,spkA,s1,a.wav,,,,-1.5,",
            "u2,spkA,s2,b.wav,,,,-1.5,",
            "u3,spkB,s1,c.wav,,,,-2.5,",
        ],
    )
    man = load_manifest(path)
    agg = aggregate_scores({"u1": 1.0, "u2": 3.0, "u3": 5.0}, man, key=AGG_SPEAKER)
    assert agg.keys == (("spkA",), ("spkB",))
    assert agg.feature_means == (2.0, 5.0)


def test_aggregate_inconsistent_target_rejected(tmp_path):
    path = _write_manifest(
        tmp_path / "m.csv",
        ["u1,spkA,s1,a.wav,,,,-1.0,", "u2,spkA,s1,b.wav,,,,-2.0,"],
    )
    man = load_manifest(path)
    with pytest.raises(ValidationError, match="not constant within key"):
        aggregate_scores({"u1": 1.0, "u2": 2.0}, man)


def test_aggregate_no_overlap_rejected(tmp_path):
    man = load_manifest(_basic_manifest(tmp_path))
    with pytest.raises(ValidationError, match="no overlap"):
        aggregate_scores({"zz": 1.0}, man)


def test_aggregate_permutation_invariant(tmp_path):
    man = load_manifest(_basic_manifest(tmp_path))
    shuffled = _write_manifest(
        tmp_path / "shuf.csv",
        [
            "u4,spkB,s2,d.wav,,,,-3.0,2",
            "u2,spkA,s1,b.wav,,,,-1.5,0",
            "u3,spkB,s1,c.wav,,,,-2.5,1",
            "u1,spkA,s1,a.wav,,,,-1.5,0",
        ],
    )
    values = {"u1": 2.0, "u2": 4.0, "u3": 7.0, "u4": 9.0}
    a = aggregate_scores(values, man)
    b = aggregate_scores(values, load_manifest(shuffled))
    assert a == b


def test_aggregate_noise_target(tmp_path):
    man = load_manifest(_basic_manifest(tmp_path))
    agg = aggregate_scores({"u1": 2.0, "u2": 4.0, "u3": 7.0, "u4": 9.0}, man,
                           target="noise")
    assert agg.target_scores == (0.0, 1.0, 2.0)


def test_aggregate_noise_target_drops_unlabeled(tmp_path):
    path = _write_manifest(
        tmp_path / "m.csv",
        ["u1,spkA,s1,a.wav,,,,-1.0,0", "u2,spkB,s1,b.wav,,,,-2.0,"],
    )
    man = load_manifest(path)
    agg = aggregate_scores({"u1": 1.0, "u2": 2.0}, man, target="noise")
    assert agg.keys == (("spkA", "s1"),)
    assert ("spkB", "s1") in agg.excluded_keys


# ---------------------------------------------------------------- report


def test_render_p_star_convention():
    assert render_p(0.0001) == "***"
    assert render_p(0.005) == "**"
    assert render_p(0.03) == "*"
    assert render_p(0.0843) == "0.0843"
    assert render_p(0.05) == "0.0500"


def test_emit_markdown_row(tmp_path):
    report = CorrelationReport(
        rows=(ReportRow("speechlm_ppl", 0.3834, 0.0001, 45),),
        metadata={"aggregation_key": "speaker-stage"},
    )
    out = tmp_path / "r.md"
    emit_report(report, "markdown", out)
    text = out.read_text()
    assert "| SpeechLMScore | 0.3834 (***) | 45 |" in text
    assert "- aggregation_key: speaker-stage" in text


def test_emit_markdown_full_p(tmp_path):
    report = CorrelationReport(rows=(ReportRow("shimmer", 0.1475, 0.0843, 40),))
    out = tmp_path / "r.md"
    emit_report(report, "markdown", out)
    assert "| Shimmer | 0.1475 (0.0843) | 40 |" in out.read_text()


def test_emit_csv(tmp_path):
    report = CorrelationReport(
        rows=(ReportRow("jitter", -0.75, 0.001234, 12),),
        metadata={"config_hash": "aabb"},
    )
    out = tmp_path / "r.csv"
    emit_report(report, "csv", out)
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "feature,r,p,n"
    assert lines[1] == "jitter,-0.750000,0.001234,12"
    assert "# config_hash=aabb" in lines


def test_emit_empty_report_errors(tmp_path):
    with pytest.raises(ValidationError, match="empty report"):
        emit_report(CorrelationReport(rows=()), "markdown", tmp_path / "r.md")


def test_emit_unknown_format(tmp_path):
    report = CorrelationReport(rows=(ReportRow("jitter", 0.0, 1.0, 3),))
    with pytest.raises(ValidationError, match="unknown report format"):
        emit_report(report, "html", tmp_path / "r.html")


def test_report_row_validation():
    with pytest.raises(ValidationError, match="r out of range"):
        ReportRow("jitter", 1.5, 0.5, 10)
    with pytest.raises(ValidationError, match="p out of range"):
        ReportRow("jitter", 0.5, -0.1, 10)
    with pytest.raises(ValidationError, match="pair count"):
        ReportRow("jitter", 0.5, 0.5, 2)


# ----------------------------------------------------- correlate_features


def test_correlate_features_end_to_end(tmp_path):
    rows = []
    rng = np.random.default_rng(7)
    values = {}
    for i in range(8):
        uid = f"u{i}"
        score = -float(i)
        rows.append(f"{uid},spk{i},s1,{uid}.wav,,,,{score},")
        values[uid] = 2.0 * i + rng.normal(0, 0.1)
    man = load_manifest(_write_manifest(tmp_path / "m.csv", rows))
    report = correlate_features({"jitter": values}, man)
    assert len(report.rows) == 1
    row = report.rows[0]
    assert row.feature_name == "jitter"
    assert row.r < -0.99
    assert row.n == 8
    assert report.metadata["aggregation_key"] == AGG_SPEAKER_STAGE


def test_correlate_features_skips_failing_feature(tmp_path):
    man = load_manifest(_basic_manifest(tmp_path))
    values = {"u1": 2.0, "u2": 4.0, "u3": 7.0, "u4": 9.0}
    report = correlate_features(
        {"jitter": values, "shimmer": {"zz": 1.0}}, man
    )
    # only 3 keys -> pearson runs; shimmer has no overlap and is skipped
    assert [r.feature_name for r in report.rows] == ["jitter"]
    assert "shimmer" in report.metadata["exclusions"]
