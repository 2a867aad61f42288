"""End-to-end severity study on a synthetic corpus.

Generates speakers along a degradation continuum, runs the full
command-line pipeline (codebook, unit model, feature extraction,
perplexity scoring, correlation report), and prints the resulting
table. Artifacts land in --out-dir for inspection.
"""

import argparse
import tempfile
from pathlib import Path

from sevscore import synth
from sevscore.cli import dispatch


def run(argv):
    code = dispatch([str(a) for a in argv])
    if code != 0:
        raise SystemExit(f"step failed ({code}): {' '.join(map(str, argv))}")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", default=None,
                    help="working directory (default: a fresh temp dir)")
    ap.add_argument("--speakers", type=int, default=24)
    ap.add_argument("--utterances", type=int, default=3)
    args = ap.parse_args()

    out = Path(args.out_dir) if args.out_dir else Path(tempfile.mkdtemp(prefix="sevstudy_"))
    out.mkdir(parents=True, exist_ok=True)
    print(f"working directory: {out}")

    manifest, clean = synth.build_severity_corpus(
        out / "corpus", n_speakers=args.speakers,
        n_utterances=args.utterances, duration=0.8, seed=11)
    print(f"corpus: {args.speakers} speakers x {args.utterances} utterances, "
          f"perceptual_score = negated degradation index")

    cb, units, lm = out / "cb.ucbk", out / "units.txt", out / "lm.unlm"
    feats, ppl, report = out / "feats.csv", out / "ppl.csv", out / "report.md"

    print("training codebook and unit model on the clean end of the continuum")
    run(["units", "train-codebook", "--manifest", clean, "--k", "16", "--out", cb])
    run(["units", "encode", "--manifest", clean, "--codebook", cb, "--out", units])
    run(["lm", "train", "--units", units, "--out", lm])

    print("extracting features and scoring perplexity over the full corpus")
    run(["features", "extract", "--manifest", manifest, "--out", feats, "--jobs", "4"])
    run(["lm", "score", "--manifest", manifest, "--codebook", cb, "--lm", lm,
         "--out", ppl])

    run(["eval", "correlate", "--manifest", manifest, "--features", feats,
         "--features", ppl, "--out", report])

    print()
    print(report.read_text())
    print("Negative rows degrade as severity rises (perceptual_score falls);")
    print("positive rows move with signal quality. The perplexity row shows")
    print("the unit model flagging degraded speech it never saw in training.")


if __name__ == "__main__":
    main()
