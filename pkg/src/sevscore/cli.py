"""Command-line entry point.

Subcommands mirror the pipeline: ``features extract`` computes the
per-utterance feature CSV, ``units train-codebook`` / ``units encode``
handle acoustic-unit discovery, ``lm train`` / ``lm score`` handle the
unit language model, and ``eval correlate`` / ``eval icc`` / ``eval per``
run the speaker-level analyses. Exit codes: 0 success, 2 validation
error, 1 I/O error. The env var SEVSCORE_LOG sets the log level, and
every text output records the effective config hash.
"""

import argparse
import csv
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .audio import compute_mfcc, load_audio
from .config import EMBEDDING_MFCC, RunConfig, load_config
from .errors import InsufficientDataError, SevscoreError, ValidationError
from .evaluation import correlate_features, emit_report, load_manifest
from .features import FEATURE_NAMES, cpp, hnr, jitter, shimmer, sigma_f0, voicing_ratio, wada_snr
from .fmtx import FrameMatrix, read_frame_matrix
from .pitch import estimate_pitch_track, extract_cycles, pitch_track_to_csv
from .stats import icc_2k, phoneme_error_rate
from .unitlm import counts_to_json, load_unit_lm, save_unit_lm, speechlm_score, train_unit_lm
from .units import UnitSequence, encode_units, load_codebook, save_codebook, train_codebook

log = logging.getLogger("sevscore")

ACOUSTIC_FEATURES = tuple(n for n in FEATURE_NAMES if n != "speechlm_ppl")


def _setup_logging() -> None:
    level_name = os.environ.get("SEVSCORE_LOG", "WARNING").upper()
    level = getattr(logging, level_name, logging.WARNING)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _effective_config(args) -> RunConfig:
    overrides = {}
    for key in ("seed", "k", "order", "alpha", "dedup", "agg_key", "embedding"):
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = value
    return load_config(getattr(args, "config", None), overrides)


def _sorted_rows(manifest):
    return sorted(manifest.rows, key=lambda r: r.utterance_id)


def _embedding_matrix(row, cfg: RunConfig):
    if cfg.embedding == EMBEDDING_MFCC:
        clip = load_audio(row.wav_path)
        m = compute_mfcc(clip, cfg.n_coeffs)
    else:
        if not row.frame_matrix_path:
            raise ValidationError(f"utterance '{row.utterance_id}' has no frame_matrix_path")
        m = read_frame_matrix(row.frame_matrix_path)
    if cfg.embed_norm == "l2":
        norms = np.linalg.norm(m.values, axis=1, keepdims=True)
        # zero rows stay zero rather than dividing by zero
        scaled = m.values / np.where(norms > 0, norms, 1.0)
        m = FrameMatrix(values=scaled, hop=m.hop)
    return m


def _acoustic_features_for_row(row_tuple):
    """Worker for one utterance: returns {feature_name: value or None}."""
    wav_path, utterance_id, cfg_kwargs, pitch_csv_dir = row_tuple
    cfg = RunConfig(**cfg_kwargs)
    clip = load_audio(wav_path)
    track = estimate_pitch_track(
        clip,
        f0_min=cfg.f0_min,
        f0_max=cfg.f0_max,
        voicing_threshold=cfg.voicing_threshold,
        silence_threshold=cfg.silence_threshold,
    )
    if pitch_csv_dir:
        out = Path(pitch_csv_dir) / f"{utterance_id}.csv"
        out.parent.mkdir(parents=True, exist_ok=True)
        pitch_track_to_csv(track, out)
    cycles = extract_cycles(
        clip, track, octave_guard=cfg.octave_guard, silence_threshold=cfg.silence_threshold
    )

    values: dict = {}

    def attempt(name, fn):
        try:
            values[name] = fn().value
        except InsufficientDataError as exc:
            log.info("%s: %s missing (%s)", utterance_id, name, exc)
            values[name] = None

    attempt("jitter", lambda: jitter(cycles, utterance_id))
    attempt("shimmer", lambda: shimmer(cycles, utterance_id))
    attempt("sigma_f0", lambda: sigma_f0(track, utterance_id))
    attempt("voicing_ratio", lambda: voicing_ratio(track, utterance_id))
    attempt("hnr", lambda: hnr(clip, track, utterance_id))
    attempt("wada_snr", lambda: wada_snr(clip, utterance_id))
    attempt("cpp", lambda: cpp(clip, utterance_id, silence_threshold=cfg.silence_threshold))
    return utterance_id, values


def _write_feature_csv(path, header_names, rows, cfg: RunConfig) -> None:
    lines = [f"# config_hash={cfg.config_hash()}"]
    lines.append("utterance_id," + ",".join(header_names))
    for uid, values in rows:
        cells = ["" if values.get(n) is None else format(values[n], ".9g") for n in header_names]
        lines.append(uid + "," + ",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_feature_csv(path) -> dict:
    """Read a feature CSV back as {feature_name: {utterance_id: value}}.

    Leading ``#`` metadata lines are skipped; empty cells mean missing.
    """
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    data_lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not data_lines:
        raise ValidationError(f"{Path(path).name}: no data rows")
    reader = csv.reader(data_lines)
    header = next(reader)
    if not header or header[0] != "utterance_id":
        raise ValidationError(f"{Path(path).name}: first column must be utterance_id")
    names = header[1:]
    out: dict = {name: {} for name in names}
    for rec in reader:
        uid = rec[0]
        for name, cell in zip(names, rec[1:]):
            if cell != "":
                try:
                    out[name][uid] = float(cell)
                except ValueError:
                    raise ValidationError(
                        f"{Path(path).name}: unparsable value {cell!r} for {uid}/{name}"
                    ) from None
    return out


def cmd_features_extract(args) -> int:
    cfg = _effective_config(args)
    manifest = load_manifest(args.manifest)
    rows = _sorted_rows(manifest)
    cfg_kwargs = cfg.as_dict()
    work = [(r.wav_path, r.utterance_id, cfg_kwargs, args.export_pitch_csv) for r in rows]

    if args.jobs and args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = dict(pool.map(_acoustic_features_for_row, work))
    else:
        results = dict(map(_acoustic_features_for_row, work))

    if args.codebook and args.lm:
        cb = load_codebook(args.codebook)
        lm = load_unit_lm(args.lm)
        for row in rows:
            seq = encode_units(_embedding_matrix(row, cfg), cb, cfg.dedup, row.utterance_id)
            results[row.utterance_id]["speechlm_ppl"] = speechlm_score(seq, lm).value
    else:
        for row in rows:
            results[row.utterance_id]["speechlm_ppl"] = None

    ordered = [(r.utterance_id, results[r.utterance_id]) for r in rows]
    _write_feature_csv(args.out, list(FEATURE_NAMES), ordered, cfg)
    return 0


def cmd_units_train_codebook(args) -> int:
    cfg = _effective_config(args)
    manifest = load_manifest(args.manifest)
    mats = [_embedding_matrix(row, cfg) for row in _sorted_rows(manifest)]
    tag = f"{cfg.embedding}{cfg.n_coeffs if cfg.embedding == EMBEDDING_MFCC else ''}"
    cb = train_codebook(
        mats,
        k=cfg.k,
        seed=cfg.seed,
        max_iters=cfg.kmeans_iters,
        tol=cfg.kmeans_tol,
        source_tag=f"{tag} cfg={cfg.config_hash()}",
    )
    save_codebook(cb, args.out)
    return 0


def cmd_units_encode(args) -> int:
    cfg = _effective_config(args)
    manifest = load_manifest(args.manifest)
    cb = load_codebook(args.codebook)
    lines = [f"# config_hash={cfg.config_hash()} k={cb.K} dedup={'on' if cfg.dedup else 'off'}"]
    for row in _sorted_rows(manifest):
        seq = encode_units(_embedding_matrix(row, cfg), cb, cfg.dedup, row.utterance_id)
        lines.append(row.utterance_id + " " + " ".join(str(int(u)) for u in seq.units))
    Path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return 0


def read_units_file(path):
    """Parse a units text file -> (sequences, vocab_size, dedup flag)."""
    vocab_size = None
    dedup = True
    seqs = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.startswith("#"):
            for token in line[1:].split():
                if token.startswith("k="):
                    vocab_size = int(token[2:])
                elif token.startswith("dedup="):
                    dedup = token[6:] == "on"
            continue
        if not line.strip():
            continue
        parts = line.split()
        seqs.append(
            UnitSequence(
                units=[int(p) for p in parts[1:]],
                utterance_id=parts[0],
                deduplicated=dedup,
            )
        )
    if vocab_size is None:
        raise ValidationError(f"{Path(path).name}: missing k= header")
    if not seqs:
        raise ValidationError(f"{Path(path).name}: no unit sequences")
    return seqs, vocab_size, dedup


def cmd_lm_train(args) -> int:
    cfg = _effective_config(args)
    seqs, vocab_size, _ = read_units_file(args.units)
    lm = train_unit_lm(seqs, vocab_size=vocab_size, order=cfg.order, alpha=cfg.alpha)
    save_unit_lm(lm, args.out)
    if args.export_counts:
        counts_to_json(lm, args.export_counts)
    return 0


def cmd_lm_score(args) -> int:
    cfg = _effective_config(args)
    manifest = load_manifest(args.manifest)
    cb = load_codebook(args.codebook)
    lm = load_unit_lm(args.lm)
    rows = []
    for row in _sorted_rows(manifest):
        seq = encode_units(_embedding_matrix(row, cfg), cb, cfg.dedup, row.utterance_id)
        rows.append((row.utterance_id, {"speechlm_ppl": speechlm_score(seq, lm).value}))
    _write_feature_csv(args.out, ["speechlm_ppl"], rows, cfg)
    return 0


def cmd_eval_correlate(args) -> int:
    cfg = _effective_config(args)
    manifest = load_manifest(args.manifest)
    feature_values: dict = {}
    for path in args.features:
        for name, per_utt in read_feature_csv(path).items():
            feature_values.setdefault(name, {}).update(per_utt)
    report = correlate_features(
        feature_values,
        manifest,
        key=cfg.agg_key,
        target=args.target,
        metadata={
            "config_hash": cfg.config_hash(),
            "dedup": "on" if cfg.dedup else "off",
        },
    )
    emit_report(report, args.format, args.out)
    return 0


def cmd_eval_icc(args) -> int:
    cfg = _effective_config(args)
    lines = Path(args.ratings).read_text(encoding="utf-8").splitlines()
    matrix = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cells = line.split(",")
        try:
            matrix.append([float(c) for c in cells[1:]])
        except ValueError:
            raise ValidationError(f"{Path(args.ratings).name}:{lineno}: unparsable rating") from None
    value = icc_2k(matrix)
    text = f"icc_2k={value:.6f}\n# config_hash={cfg.config_hash()}\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return 0


def cmd_eval_per(args) -> int:
    cfg = _effective_config(args)
    manifest = load_manifest(args.manifest)
    rows = []
    for row in _sorted_rows(manifest):
        if not (row.ref_phonemes_path and row.hyp_phonemes_path):
            log.info("%s: phoneme paths missing, skipped", row.utterance_id)
            continue
        ref = Path(row.ref_phonemes_path).read_text(encoding="utf-8")
        hyp = Path(row.hyp_phonemes_path).read_text(encoding="utf-8")
        rows.append((row.utterance_id, {"per": phoneme_error_rate(ref, hyp)}))
    if not rows:
        raise ValidationError("no utterances with phoneme transcripts")
    _write_feature_csv(args.out, ["per"], rows, cfg)
    return 0


def _add_common(parser, *names):
    if "config" in names:
        parser.add_argument("--config", help="key = value config file")
    if "seed" in names:
        parser.add_argument("--seed", type=int, help="RNG seed recorded in the config hash")
    if "dedup" in names:
        parser.add_argument("--dedup", choices=["on", "off"], help="collapse adjacent repeated units")
    if "embedding" in names:
        parser.add_argument(
            "--embedding",
            choices=["mfcc", "frame-matrix"],
            help="frame embedding source for unit discovery",
        )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sevscore",
        description="Reference-free speech severity scoring toolkit",
    )
    top = parser.add_subparsers(dest="group", required=True)

    p_features = top.add_parser("features", help="acoustic feature extraction")
    features_sub = p_features.add_subparsers(dest="cmd", required=True)
    p_extract = features_sub.add_parser("extract", help="per-utterance feature CSV")
    p_extract.add_argument("--manifest", required=True)
    p_extract.add_argument("--out", required=True)
    p_extract.add_argument("--jobs", type=int, default=1, help="parallel workers over utterances")
    p_extract.add_argument("--codebook", help="codebook file, enables the speechlm_ppl column")
    p_extract.add_argument("--lm", help="unit LM file, enables the speechlm_ppl column")
    p_extract.add_argument("--export-pitch-csv", metavar="DIR", help="write per-utterance pitch tracks")
    _add_common(p_extract, "config", "seed", "dedup", "embedding")
    p_extract.set_defaults(func=cmd_features_extract)

    p_units = top.add_parser("units", help="acoustic-unit discovery")
    units_sub = p_units.add_subparsers(dest="cmd", required=True)
    p_train_cb = units_sub.add_parser("train-codebook", help="k-means codebook over frame embeddings")
    p_train_cb.add_argument("--manifest", required=True)
    p_train_cb.add_argument("--out", required=True)
    p_train_cb.add_argument("--k", type=int, help="codebook size")
    _add_common(p_train_cb, "config", "seed", "embedding")
    p_train_cb.set_defaults(func=cmd_units_train_codebook)
    p_encode = units_sub.add_parser("encode", help="frames to unit sequences")
    p_encode.add_argument("--manifest", required=True)
    p_encode.add_argument("--codebook", required=True)
    p_encode.add_argument("--out", required=True)
    _add_common(p_encode, "config", "seed", "dedup", "embedding")
    p_encode.set_defaults(func=cmd_units_encode)

    p_lm = top.add_parser("lm", help="unit language model")
    lm_sub = p_lm.add_subparsers(dest="cmd", required=True)
    p_lm_train = lm_sub.add_parser("train", help="train the smoothed n-gram unit LM")
    p_lm_train.add_argument("--units", required=True, help="units file from `units encode`")
    p_lm_train.add_argument("--out", required=True)
    p_lm_train.add_argument("--order", type=int, help="n-gram order")
    p_lm_train.add_argument("--alpha", type=float, help="additive smoothing constant")
    p_lm_train.add_argument("--export-counts", metavar="JSON", help="diagnostic counts dump")
    _add_common(p_lm_train, "config", "seed")
    p_lm_train.set_defaults(func=cmd_lm_train)
    p_lm_score = lm_sub.add_parser("score", help="perplexity per utterance")
    p_lm_score.add_argument("--manifest", required=True)
    p_lm_score.add_argument("--codebook", required=True)
    p_lm_score.add_argument("--lm", required=True)
    p_lm_score.add_argument("--out", required=True)
    _add_common(p_lm_score, "config", "seed", "dedup", "embedding")
    p_lm_score.set_defaults(func=cmd_lm_score)

    p_eval = top.add_parser("eval", help="speaker-level evaluation")
    eval_sub = p_eval.add_subparsers(dest="cmd", required=True)
    p_corr = eval_sub.add_parser("correlate", help="feature vs score correlations")
    p_corr.add_argument("--manifest", required=True)
    p_corr.add_argument("--features", action="append", required=True, help="feature CSV (repeatable)")
    p_corr.add_argument("--target", choices=["perceptual", "noise"], default="perceptual")
    p_corr.add_argument("--agg-key", dest="agg_key", choices=["speaker", "speaker-stage"])
    p_corr.add_argument("--format", choices=["csv", "markdown"], default="markdown")
    p_corr.add_argument("--out", required=True)
    _add_common(p_corr, "config", "seed", "dedup")
    p_corr.set_defaults(func=cmd_eval_correlate)
    p_icc = eval_sub.add_parser("icc", help="inter-rater reliability ICC(2,k)")
    p_icc.add_argument("--ratings", required=True, help="CSV: subject id, then one column per rater")
    p_icc.add_argument("--out")
    _add_common(p_icc, "config", "seed")
    p_icc.set_defaults(func=cmd_eval_icc)
    p_per = eval_sub.add_parser("per", help="phoneme error rate per utterance")
    p_per.add_argument("--manifest", required=True)
    p_per.add_argument("--out", required=True)
    _add_common(p_per, "config", "seed")
    p_per.set_defaults(func=cmd_eval_per)

    return parser


def dispatch(argv) -> int:
    """Run one CLI invocation; returns the process exit code."""
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code if isinstance(exc.code, int) else 0
        return code
    try:
        return args.func(args)
    except SevscoreError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
