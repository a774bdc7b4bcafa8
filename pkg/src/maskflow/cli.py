"""Command-line interface.

Subcommands: run, resume, track, composite, metrics, list-labels,
invert-mask, serve. Exit codes are a stable contract:

* 0: success
* 2: validation error (bad inputs, schema violations, wrong phase)
* 3: a re-selection is required (the session is left resumable)
* 4: I/O error

With ``--json`` errors are emitted as a single JSON object on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from .compositing import CompositeJob, LabelSetMode, TrackedMode, composite_sequence
from .errors import (
    DimensionMismatch,
    FormatError,
    MaskflowError,
    PhaseError,
    ReselectionRequired,
    ValidationError,
)
from .manifest import (
    dump_json,
    list_frame_dir,
    load_mask_image,
    parse_manifest,
    write_mask_image,
)
from .mask import invert
from .metrics import mean_iou, panoptic_quality, per_class_iou
from .session import (
    AWAITING_RESELECTION,
    DONE,
    RunConfig,
    Session,
)
from .tracking import TrackingPolicy, TrackingTrace, track

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_RESELECTION = 3
EXIT_IO = 4

_POLICY_ALIASES = {"prev": "previous", "first": "first", "adaptive": "adaptive"}


def _policy_from_args(args) -> TrackingPolicy:
    kind = _POLICY_ALIASES[args.policy]
    if kind != "adaptive":
        if args.tau is not None or args.every is not None:
            raise ValidationError("--tau/--every only apply to --policy adaptive")
        return TrackingPolicy(kind=kind)
    return TrackingPolicy.adaptive(
        tau=args.tau if args.tau is not None else 0.5,
        period=args.every,
    )


def _mode_args(parser: argparse.ArgumentParser, selection_required: bool) -> None:
    parser.add_argument("--select", type=int, default=None,
                        help="initial candidate index for frame 0 (tracked mode)")
    parser.add_argument("--labels", type=int, nargs="+", default=None,
                        help="candidate indices to retain every frame (label-set mode)")
    parser.set_defaults(_selection_required=selection_required)


def _policy_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--policy", choices=sorted(_POLICY_ALIASES), default="first",
                        help="reference policy: prev (previous frame), first (frame 0), adaptive")
    parser.add_argument("--tau", type=float, default=None,
                        help="adaptive re-selection threshold in [0,1], default 0.5")
    parser.add_argument("--every", type=int, default=None,
                        help="adaptive: refresh the reference every N frames")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="maskflow", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="track, cut out and composite in one go")
    run.add_argument("--manifest", required=True, help="foreground candidate manifest")
    run.add_argument("--bg", required=True, help="background frame directory")
    _policy_args(run)
    _mode_args(run, selection_required=True)
    run.add_argument("--mismatch", choices=("truncate", "loop", "hold"), default="loop",
                     help="frame-count mismatch policy")
    run.add_argument("--on-reselect", choices=("fail", "auto", "serve"), default="fail")
    run.add_argument("--out", required=True, help="session/output directory")
    run.add_argument("--port", type=int, default=8765, help="port for --on-reselect serve")
    run.add_argument("--static", default=None, help="static UI directory for the server")
    run.add_argument("--json", action="store_true", help="machine-readable errors on stderr")

    resume = sub.add_parser("resume", help="answer a pending re-selection and continue")
    resume.add_argument("session", help="session directory of a blocked run")
    resume.add_argument("--frame", type=int, required=True)
    resume.add_argument("--choice", type=int, required=True)
    resume.add_argument("--json", action="store_true")

    track_p = sub.add_parser("track", help="run tracking only, write trace.json")
    track_p.add_argument("--manifest", required=True)
    _policy_args(track_p)
    track_p.add_argument("--select", type=int, required=True)
    track_p.add_argument("--on-reselect", choices=("fail", "auto"), default="fail")
    track_p.add_argument("--out", required=True)
    track_p.add_argument("--json", action="store_true")

    comp = sub.add_parser("composite", help="composite from an existing trace or label set")
    comp.add_argument("--manifest", required=True)
    comp.add_argument("--bg", required=True)
    comp.add_argument("--trace", default=None, help="trace.json from a tracking run")
    comp.add_argument("--labels", type=int, nargs="+", default=None)
    comp.add_argument("--mismatch", choices=("truncate", "loop", "hold"), default="loop")
    comp.add_argument("--out", required=True)
    comp.add_argument("--json", action="store_true")

    met = sub.add_parser("metrics", help="score predicted masks against ground truth")
    met.add_argument("--pred", required=True, help="directory of per-id mask images")
    met.add_argument("--gt", required=True, help="directory of per-id mask images")
    met.add_argument("--json", action="store_true")

    ll = sub.add_parser("list-labels", help="print the candidate labels of one frame")
    ll.add_argument("--manifest", required=True)
    ll.add_argument("--frame", type=int, default=0)
    ll.add_argument("--json", action="store_true")

    inv = sub.add_parser("invert-mask", help="complement a mask image")
    inv.add_argument("input")
    inv.add_argument("output")
    inv.add_argument("--json", action="store_true")

    serve = sub.add_parser("serve", help="serve a session over HTTP for interactive selection")
    serve.add_argument("--out", required=True, help="session directory (existing or new)")
    serve.add_argument("--port", type=int, default=8765)
    serve.add_argument("--static", default=None, help="directory of UI files to serve at /")
    serve.add_argument("--manifest", default=None, help="needed when creating a new session")
    serve.add_argument("--bg", default=None)
    _policy_args(serve)
    _mode_args(serve, selection_required=False)
    serve.add_argument("--mismatch", choices=("truncate", "loop", "hold"), default="loop")
    serve.add_argument("--json", action="store_true")

    return parser


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def _config_from_args(args, selection_required: bool) -> RunConfig:
    if args.select is not None and args.labels is not None:
        raise ValidationError("give exactly one of --select or --labels")
    if selection_required and args.select is None and args.labels is None:
        raise ValidationError("an initial selection is required: --select or --labels")
    mode = "labels" if args.labels is not None else "tracked"
    return RunConfig(
        manifest=args.manifest,
        background=args.bg,
        out=args.out,
        policy=_policy_from_args(args),
        mode=mode,
        select=args.select,
        labels=tuple(args.labels) if args.labels is not None else None,
        mismatch=args.mismatch,
        on_reselect=getattr(args, "on_reselect", "fail"),
    )


def _serve_session(session: Session, port: int, static) -> int:
    from .service import serve_session

    serve_session(session, port=port, static_dir=static)
    return EXIT_OK if session.phase == DONE else EXIT_RESELECTION


def cmd_run(args) -> int:
    config = _config_from_args(args, selection_required=True)
    session = Session.create(config)
    phase = session.advance()
    if phase == AWAITING_RESELECTION:
        if config.on_reselect == "serve":
            return _serve_session(session, args.port, args.static)
        raise ReselectionRequired(session.pending_frame)
    print(f"run complete: {session.dir / 'outputs'}")
    return EXIT_OK


def cmd_resume(args) -> int:
    session = Session.load(args.session)
    if session.phase != AWAITING_RESELECTION or session.pending_frame != args.frame:
        raise PhaseError(
            f"session is in phase {session.phase!r}"
            + (f" (pending frame {session.pending_frame})" if session.pending_frame is not None else "")
            + f", cannot resume at frame {args.frame}"
        )
    phase = session.select(args.frame, args.choice)
    if phase == AWAITING_RESELECTION:
        raise ReselectionRequired(session.pending_frame)
    print(f"resumed through frame {args.frame}, session is {phase}")
    return EXIT_OK


def cmd_track(args) -> int:
    manifest = parse_manifest(args.manifest)
    policy = _policy_from_args(args)
    trace = track(
        manifest.iter_candidate_masks(), policy, args.select, on_reselect=args.on_reselect
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "trace.json").write_text(dump_json(trace.to_dict()), encoding="utf-8")
    print(f"trace written: {out / 'trace.json'}")
    return EXIT_OK


def cmd_composite(args) -> int:
    if (args.trace is None) == (args.labels is None):
        raise ValidationError("give exactly one of --trace or --labels")
    manifest = parse_manifest(args.manifest)
    if args.trace is not None:
        trace_path = Path(args.trace)
        if not trace_path.is_file():
            raise ValidationError(f"trace file not found: {trace_path}")
        trace = TrackingTrace.from_dict(json.loads(trace_path.read_text(encoding="utf-8")))
        mode = TrackedMode(trace)
    else:
        mode = LabelSetMode(frozenset(args.labels))
    job = CompositeJob(
        foreground=manifest,
        background=list_frame_dir(args.bg),
        mode=mode,
        mismatch=args.mismatch,
        output=Path(args.out),
    )
    count = composite_sequence(job)
    print(f"{count} frames written: {args.out}")
    return EXIT_OK


def _load_mask_dir(directory) -> dict:
    directory = Path(directory)
    if not directory.is_dir():
        raise ValidationError(f"not a directory: {directory}")
    return {p.stem: load_mask_image(p) for p in sorted(directory.glob("*.png"))}


def cmd_metrics(args) -> int:
    pred = _load_mask_dir(args.pred)
    gt = _load_mask_dir(args.gt)
    pano = panoptic_quality(pred, gt)
    per_class = per_class_iou(pred, gt)
    report = {
        "miou": mean_iou(pred, gt),
        "per_class": {k: per_class[k] for k in sorted(per_class)},
        "pq": pano.pq,
        "sq": pano.sq,
        "rq": pano.rq,
        "tp": pano.tp,
        "fp": pano.fp,
        "fn": pano.fn,
    }
    sys.stdout.write(dump_json(report))
    return EXIT_OK


def cmd_list_labels(args) -> int:
    manifest = parse_manifest(args.manifest, check_assets=False)
    frame = manifest.frame(args.frame)
    for i, cand in enumerate(frame.candidates):
        label = cand.meta.label if cand.meta.label is not None else "(unlabeled)"
        print(f"{i}: {label}")
    return EXIT_OK


def cmd_invert_mask(args) -> int:
    mask = load_mask_image(args.input)
    write_mask_image(invert(mask), args.output)
    return EXIT_OK


def cmd_serve(args) -> int:
    out = Path(args.out)
    if (out / "session.json").is_file():
        session = Session.load(out)
    else:
        if args.manifest is None or args.bg is None:
            raise ValidationError("creating a session needs --manifest and --bg")
        config = replace(_config_from_args(args, selection_required=False), on_reselect="serve")
        session = Session.create(config)
        session.advance()
    return _serve_session(session, args.port, args.static)


_COMMANDS = {
    "run": cmd_run,
    "resume": cmd_resume,
    "track": cmd_track,
    "composite": cmd_composite,
    "metrics": cmd_metrics,
    "list-labels": cmd_list_labels,
    "invert-mask": cmd_invert_mask,
    "serve": cmd_serve,
}


def _error_info(exc: BaseException) -> tuple[int, str]:
    if isinstance(exc, ReselectionRequired):
        return EXIT_RESELECTION, "reselection_required"
    if isinstance(exc, PhaseError):
        return EXIT_VALIDATION, "phase"
    if isinstance(exc, FormatError):
        return EXIT_VALIDATION, "format"
    if isinstance(exc, (ValidationError, DimensionMismatch, MaskflowError)):
        return EXIT_VALIDATION, "validation"
    if isinstance(exc, OSError):
        return EXIT_IO, "io"
    raise exc


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (MaskflowError, OSError) as exc:
        code, kind = _error_info(exc)
        if getattr(args, "json", False):
            payload: dict = {"error": {"code": kind, "message": str(exc)}}
            if isinstance(exc, ReselectionRequired):
                payload["error"]["frame"] = exc.frame
            sys.stderr.write(json.dumps(payload) + "\n")
        else:
            sys.stderr.write(f"error: {exc}\n")
        return code


def entrypoint() -> None:
    sys.exit(main())
