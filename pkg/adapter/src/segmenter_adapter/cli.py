"""Adapter command line: extract frames, then segment them into a manifest."""

from __future__ import annotations

import argparse
import sys

from .config import AdapterConfig, AdapterError
from .frames import extract_frames
from .pipeline import segment_frames


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="adapter", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    ext = sub.add_parser("extract-frames", help="decode a video into numbered PNG frames")
    ext.add_argument("video")
    ext.add_argument("--out", required=True)
    ext.add_argument("--fps", type=float, default=None, help="target rate; default keeps all frames")

    seg = sub.add_parser("segment", help="run a model over frames and emit a manifest")
    seg.add_argument("--model", required=True,
                     help="builtin:color, builtin:blob, or hf:<model id>")
    seg.add_argument("--mode", choices=("semantic", "proposals"), required=True)
    seg.add_argument("--frames", required=True, help="input frame directory")
    seg.add_argument("--out", required=True, help="output manifest directory")
    seg.add_argument("--device", default=None, help="device hint for hf models")

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "extract-frames":
            count = extract_frames(args.video, args.out, fps=args.fps)
            print(f"{count} frames written to {args.out}")
        else:
            config = AdapterConfig(
                model=args.model,
                mode=args.mode,
                frames_dir=args.frames,
                out_dir=args.out,
                device=args.device,
            )
            path = segment_frames(config)
            print(f"manifest written: {path}")
        return 0
    except AdapterError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except OSError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 4


def entrypoint() -> None:
    sys.exit(main())
