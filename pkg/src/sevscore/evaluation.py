"""Corpus manifest handling, speaker-level aggregation, and report
emission.

A manifest is the single CSV that ties utterances to speakers, stages,
audio paths, optional precomputed frame matrices, optional phoneme
transcripts, a perceptual severity score, and an optional 0-2 noise
score. Per-utterance feature values are averaged within an aggregation
key (speaker, or speaker plus stage) and correlated against the key's
perceptual score.
"""

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path

from .errors import SevscoreError, ValidationError
from .stats import pearson

log = logging.getLogger(__name__)

MANIFEST_COLUMNS = [
    "utterance_id",
    "speaker_id",
    "stage_id",
    "wav_path",
    "frame_matrix_path",
    "ref_phonemes_path",
    "hyp_phonemes_path",
    "perceptual_score",
    "noise_score",
]

AGG_SPEAKER = "speaker"
AGG_SPEAKER_STAGE = "speaker-stage"

# Star rendering for p-values, smallest threshold first.
P_STARS = [(0.001, "***"), (0.01, "**"), (0.05, "*")]

DISPLAY_NAMES = {
    "jitter": "Jitter",
    "shimmer": "Shimmer",
    "sigma_f0": "SigmaF0",
    "voicing_ratio": "Voicing ratio",
    "hnr": "HNR",
    "wada_snr": "WADA SNR",
    "cpp": "CPP",
    "speechlm_ppl": "SpeechLMScore",
    "per": "PER",
}


@dataclass(frozen=True)
class ManifestRow:
    utterance_id: str
    speaker_id: str
    stage_id: str
    wav_path: str
    frame_matrix_path: str | None
    ref_phonemes_path: str | None
    hyp_phonemes_path: str | None
    perceptual_score: float
    noise_score: int | None


@dataclass(frozen=True)
class EvaluationManifest:
    rows: tuple

    def __len__(self) -> int:
        return len(self.rows)

    def row(self, utterance_id: str) -> ManifestRow:
        for r in self.rows:
            if r.utterance_id == utterance_id:
                return r
        raise KeyError(utterance_id)


def load_manifest(path) -> EvaluationManifest:
    """Parse and validate the manifest CSV.

    The header must match the documented column list exactly. Optional
    columns may be empty per row; utterance ids must be unique and
    whitespace-free (they double as tokens in the unit file format).
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ValidationError(f"{path.name}: empty manifest")
        if list(reader.fieldnames) != MANIFEST_COLUMNS:
            missing = [c for c in MANIFEST_COLUMNS if c not in (reader.fieldnames or [])]
            if missing:
                raise ValidationError(f"{path.name}: missing required column '{missing[0]}'")
            raise ValidationError(f"{path.name}: header mismatch: {reader.fieldnames}")
        rows = []
        seen = set()
        for lineno, rec in enumerate(reader, start=2):
            uid = (rec["utterance_id"] or "").strip()
            if not uid:
                raise ValidationError(f"{path.name}:{lineno}: empty utterance_id")
            if any(ch.isspace() for ch in uid):
                raise ValidationError(f"{path.name}:{lineno}: utterance_id contains whitespace")
            if uid in seen:
                raise ValidationError(f"{path.name}: duplicate utterance_id '{uid}'")
            seen.add(uid)
            speaker = (rec["speaker_id"] or "").strip()
            stage = (rec["stage_id"] or "").strip()
            if not speaker:
                raise ValidationError(f"{path.name}:{lineno}: empty speaker_id")
            raw_score = (rec["perceptual_score"] or "").strip()
            try:
                perceptual = float(raw_score)
            except ValueError:
                raise ValidationError(
                    f"{path.name}:{lineno}: unparsable perceptual score {raw_score!r}"
                ) from None
            raw_noise = (rec["noise_score"] or "").strip()
            noise = None
            if raw_noise:
                try:
                    noise = int(raw_noise)
                except ValueError:
                    raise ValidationError(
                        f"{path.name}:{lineno}: unparsable noise score {raw_noise!r}"
                    ) from None
                if noise not in (0, 1, 2):
                    raise ValidationError(f"{path.name}:{lineno}: noise score out of range: {noise}")
            rows.append(
                ManifestRow(
                    utterance_id=uid,
                    speaker_id=speaker,
                    stage_id=stage,
                    wav_path=(rec["wav_path"] or "").strip(),
                    frame_matrix_path=(rec["frame_matrix_path"] or "").strip() or None,
                    ref_phonemes_path=(rec["ref_phonemes_path"] or "").strip() or None,
                    hyp_phonemes_path=(rec["hyp_phonemes_path"] or "").strip() or None,
                    perceptual_score=perceptual,
                    noise_score=noise,
                )
            )
    if not rows:
        raise ValidationError(f"{path.name}: manifest has no rows")
    return EvaluationManifest(rows=tuple(rows))


def _group_key(row: ManifestRow, key: str):
    if key == AGG_SPEAKER:
        return (row.speaker_id,)
    if key == AGG_SPEAKER_STAGE:
        return (row.speaker_id, row.stage_id)
    raise ValidationError(f"unknown aggregation key '{key}'")


@dataclass(frozen=True)
class AggregatedScores:
    """Per-key mean feature values paired with the key's target score."""

    keys: tuple
    feature_means: tuple
    target_scores: tuple
    excluded_keys: tuple = ()


def aggregate_scores(
    values: dict,
    manifest: EvaluationManifest,
    key: str = AGG_SPEAKER_STAGE,
    target: str = "perceptual",
) -> AggregatedScores:
    """Collapse per-utterance values to per-key means.

    ``values`` maps utterance_id to a scalar; utterances absent from it
    count as missing. A key with no usable utterance is dropped and
    logged. The target score (perceptual, or noise where present) must
    be constant within each key group.
    """
    if not any(uid in values for r in manifest.rows for uid in [r.utterance_id]):
        raise ValidationError("no overlap between feature values and manifest")
    groups: dict = {}
    for row in manifest.rows:
        groups.setdefault(_group_key(row, key), []).append(row)

    keys, means, targets, excluded = [], [], [], []
    for gkey in sorted(groups):
        rows = groups[gkey]
        if target == "perceptual":
            group_targets = {r.perceptual_score for r in rows}
        elif target == "noise":
            if any(r.noise_score is None for r in rows):
                excluded.append(gkey)
                log.info("dropping key %s: missing noise score", gkey)
                continue
            group_targets = {float(r.noise_score) for r in rows}
        else:
            raise ValidationError(f"unknown target '{target}'")
        if len(group_targets) != 1:
            raise ValidationError(f"{target} score not constant within key {gkey}")
        usable = [values[r.utterance_id] for r in rows if r.utterance_id in values]
        if not usable:
            excluded.append(gkey)
            log.info("dropping key %s: no usable utterance values", gkey)
            continue
        keys.append(gkey)
        means.append(sum(usable) / len(usable))
        targets.append(group_targets.pop())
    return AggregatedScores(
        keys=tuple(keys),
        feature_means=tuple(means),
        target_scores=tuple(targets),
        excluded_keys=tuple(excluded),
    )


@dataclass(frozen=True)
class ReportRow:
    feature_name: str
    r: float
    p: float
    n: int

    def __post_init__(self):
        if not (-1.0 <= self.r <= 1.0):
            raise ValidationError(f"r out of range: {self.r}")
        if not (0.0 <= self.p <= 1.0):
            raise ValidationError(f"p out of range: {self.p}")
        if self.n < 3:
            raise ValidationError(f"pair count too small: {self.n}")


@dataclass(frozen=True)
class CorrelationReport:
    rows: tuple
    metadata: dict = field(default_factory=dict)


def correlate_features(
    feature_values: dict,
    manifest: EvaluationManifest,
    key: str = AGG_SPEAKER_STAGE,
    target: str = "perceptual",
    metadata: dict | None = None,
) -> CorrelationReport:
    """Aggregate each feature and correlate against the target score.

    ``feature_values`` maps feature_name -> {utterance_id: scalar}.
    Features whose aggregation or correlation fails are skipped with a
    log entry rather than aborting the report.
    """
    rows = []
    exclusions = []
    for name in feature_values:
        per_utt = feature_values[name]
        if not per_utt:
            exclusions.append(f"{name}: no values")
            continue
        try:
            agg = aggregate_scores(per_utt, manifest, key=key, target=target)
            res = pearson(agg.feature_means, agg.target_scores)
        except SevscoreError as exc:
            exclusions.append(f"{name}: {exc}")
            log.warning("feature %s skipped: %s", name, exc)
            continue
        if agg.excluded_keys:
            exclusions.append(f"{name}: {len(agg.excluded_keys)} key(s) dropped")
        rows.append(ReportRow(feature_name=name, r=res.r, p=res.p, n=res.n))
    meta = dict(metadata or {})
    meta.setdefault("aggregation_key", key)
    meta.setdefault("target", target)
    if exclusions:
        meta["exclusions"] = "; ".join(exclusions)
    return CorrelationReport(rows=tuple(rows), metadata=meta)


def render_p(p: float) -> str:
    for threshold, stars in P_STARS:
        if p < threshold:
            return stars
    return format(p, ".4f")


def emit_report(report: CorrelationReport, fmt: str, path) -> None:
    """Write the correlation table as CSV or markdown.

    Each row shows r with the p-value rendered per the star convention
    (below 0.05 *, 0.01 **, 0.001 ***, otherwise the full value). A
    metadata footer records the aggregation key, dedup flag, config
    hash, and any exclusions.
    """
    if not report.rows:
        raise ValidationError("empty report")
    path = Path(path)
    lines = []
    if fmt == "markdown":
        lines.append("| Feature | r (p) | n |")
        lines.append("| --- | --- | --- |")
        for row in report.rows:
            name = DISPLAY_NAMES.get(row.feature_name, row.feature_name)
            lines.append(f"| {name} | {row.r:.4f} ({render_p(row.p)}) | {row.n} |")
        lines.append("")
        for k in sorted(report.metadata):
            lines.append(f"- {k}: {report.metadata[k]}")
    elif fmt == "csv":
        lines.append("feature,r,p,n")
        for row in report.rows:
            lines.append(f"{row.feature_name},{row.r:.6f},{row.p:.6g},{row.n}")
        for k in sorted(report.metadata):
            lines.append(f"# {k}={report.metadata[k]}")
    else:
        raise ValidationError(f"unknown report format '{fmt}'")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
