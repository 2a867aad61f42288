"""Command-line batch export: one .fmtx per input wav."""

import argparse
import logging
import os
import sys
from pathlib import Path

from .encoder import load_encoder
from .errors import BridgeError
from .export import ExportJob, export_embeddings

log = logging.getLogger("embed_bridge")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="embed-bridge",
        description="Export speech-encoder hidden layers to frame-matrix files")
    sub = parser.add_subparsers(dest="command", required=True)
    exp = sub.add_parser("export", help="export one wav or a directory of wavs")
    exp.add_argument("--wav", required=True, help="wav file or directory")
    exp.add_argument("--layer", type=int, default=1,
                     help="hidden state index, 0 = conv front-end (default 1)")
    exp.add_argument("--out-dir", required=True, help="destination directory")
    exp.add_argument("--model", required=True,
                     help="pretrained encoder, local path or hub id")
    return parser


def cmd_export(args) -> int:
    wav = Path(args.wav)
    if wav.is_dir():
        inputs = sorted(wav.glob("*.wav"))
        if not inputs:
            raise BridgeError(f"no wav files in {wav}")
    else:
        inputs = [wav]
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    encoder = load_encoder(args.model)
    for path in inputs:
        job = ExportJob(wav_path=str(path), layer_index=args.layer,
                        out_path=str(out_dir / f"{path.stem}.fmtx"),
                        model_id=args.model)
        export_embeddings(job, encoder)
        log.info("%s -> %s", path.name, job.out_path)
    return 0


def dispatch(argv) -> int:
    try:
        import transformers.utils.logging as hf_logging
        hf_logging.set_verbosity_error()
        hf_logging.disable_progress_bar()
    except Exception:
        pass
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return cmd_export(args)
    except BridgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    logging.basicConfig(
        level=getattr(logging, os.environ.get("BRIDGE_LOG", "warning").upper(),
                      logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s")
    raise SystemExit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
