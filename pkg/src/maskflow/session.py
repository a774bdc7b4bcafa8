"""Persistent run sessions: configuration, phase machine, and resume.

A session directory is the unit the CLI and the HTTP service share::

    <out>/
      session.json          phase, accepted selections, config + fingerprint
      trace.partial.json    trace so far, present while a re-selection is pending
      trace.json            final trace
      report.json           run summary
      outputs/              composited frames + output_manifest.json

Progress is replayed, not checkpointed: the session records every accepted
human selection, and advancing re-runs the (deterministic) tracker with
those answers injected. Identical inputs plus identical answers always
produce identical artifacts, which is what makes the resume path safe.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

from .compositing import (
    MISMATCH_POLICIES,
    CompositeJob,
    LabelSetMode,
    TrackedMode,
    composite_sequence,
)
from .errors import (
    MaskflowError,
    PhaseError,
    ReselectionRequired,
    ValidationError,
)
from .manifest import Manifest, dump_json, list_frame_dir, parse_manifest
from .tracking import TrackingPolicy, TrackingTrace, track

# phase order; a session only ever moves forward through this list
AWAITING_INITIAL = "awaiting_initial_selection"
TRACKING = "tracking"
AWAITING_RESELECTION = "awaiting_reselection"
COMPOSITING = "compositing"
DONE = "done"
FAILED = "failed"

ON_RESELECT_MODES = ("fail", "auto", "serve")

SESSION_FILE = "session.json"
TRACE_FILE = "trace.json"
PARTIAL_TRACE_FILE = "trace.partial.json"
REPORT_FILE = "report.json"
OUTPUTS_DIR = "outputs"


@dataclass(frozen=True)
class RunConfig:
    """Everything a run needs; fully deterministic, no seeds involved."""

    manifest: str
    background: str
    out: str
    policy: TrackingPolicy
    mode: str = "tracked"
    select: Optional[int] = None
    labels: Optional[tuple[int, ...]] = None
    mismatch: str = "loop"
    on_reselect: str = "fail"

    def __post_init__(self) -> None:
        if self.mode not in ("tracked", "labels"):
            raise ValidationError(f"mode must be 'tracked' or 'labels', got {self.mode!r}")
        if self.mode == "labels":
            if not self.labels:
                raise ValidationError("labels mode needs a non-empty label index list")
            if self.select is not None:
                raise ValidationError("labels mode does not take an initial candidate index")
        else:
            if self.labels is not None:
                raise ValidationError("tracked mode does not take a label list")
        if self.mismatch not in MISMATCH_POLICIES:
            raise ValidationError(
                f"unknown mismatch policy {self.mismatch!r}, expected one of {MISMATCH_POLICIES}"
            )
        if self.on_reselect not in ON_RESELECT_MODES:
            raise ValidationError(
                f"unknown on_reselect mode {self.on_reselect!r}, expected one of {ON_RESELECT_MODES}"
            )

    def to_dict(self) -> dict:
        return {
            "manifest": self.manifest,
            "background": self.background,
            "out": self.out,
            "policy": self.policy.to_dict(),
            "mode": self.mode,
            "select": self.select,
            "labels": list(self.labels) if self.labels is not None else None,
            "mismatch": self.mismatch,
            "on_reselect": self.on_reselect,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        labels = data.get("labels")
        return cls(
            manifest=data["manifest"],
            background=data["background"],
            out=data["out"],
            policy=TrackingPolicy.from_dict(data["policy"]),
            mode=data.get("mode", "tracked"),
            select=data.get("select"),
            labels=tuple(labels) if labels is not None else None,
            mismatch=data.get("mismatch", "loop"),
            on_reselect=data.get("on_reselect", "fail"),
        )

    def fingerprint(self) -> str:
        """Identity of the run's inputs and knobs.

        The output directory is deliberately excluded: the same job run
        into two different directories is the same job.
        """
        payload = self.to_dict()
        payload.pop("out")
        canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return "sha256:" + hashlib.sha256(canonical.encode("utf-8")).hexdigest()


class Session:
    """One run, persisted under its output directory."""

    def __init__(self, directory: Path, config: RunConfig) -> None:
        self.dir = Path(directory)
        self.config = config
        self.phase = AWAITING_INITIAL
        self.pending_frame: Optional[int] = None
        self.failure_reason: Optional[str] = None
        self.selections: dict[int, int] = {}
        self._manifest: Optional[Manifest] = None

    # -- construction --------------------------------------------------

    @classmethod
    def create(cls, config: RunConfig) -> "Session":
        directory = Path(config.out)
        if (directory / SESSION_FILE).exists():
            raise ValidationError(f"output directory already holds a session: {directory}")
        directory.mkdir(parents=True, exist_ok=True)
        config = replace(
            config,
            manifest=str(Path(config.manifest).resolve()),
            background=str(Path(config.background).resolve()),
            out=str(directory.resolve()),
        )
        session = cls(directory, config)
        if config.mode == "labels":
            session.phase = COMPOSITING
        elif config.select is not None:
            session.selections[0] = config.select
            session.phase = TRACKING
        else:
            session.phase = AWAITING_INITIAL
            session.pending_frame = 0
        session.save()
        return session

    @classmethod
    def load(cls, directory) -> "Session":
        directory = Path(directory)
        path = directory / SESSION_FILE
        if not path.is_file():
            raise ValidationError(f"no session found in {directory}")
        data = json.loads(path.read_text(encoding="utf-8"))
        config = RunConfig.from_dict(data["config"])
        if config.fingerprint() != data.get("config_fingerprint"):
            raise ValidationError("session config fingerprint mismatch, refusing to touch it")
        session = cls(directory, config)
        session.phase = data["phase"]
        session.pending_frame = data.get("pending_frame")
        session.failure_reason = data.get("failure_reason")
        session.selections = {int(k): int(v) for k, v in data.get("selections", {}).items()}
        return session

    # -- persistence ---------------------------------------------------

    def save(self) -> None:
        payload = {
            "version": 1,
            "phase": self.phase,
            "pending_frame": self.pending_frame,
            "failure_reason": self.failure_reason,
            "selections": {str(k): v for k, v in sorted(self.selections.items())},
            "config": self.config.to_dict(),
            "config_fingerprint": self.config.fingerprint(),
        }
        (self.dir / SESSION_FILE).write_text(dump_json(payload), encoding="utf-8")

    @property
    def manifest(self) -> Manifest:
        if self._manifest is None:
            self._manifest = parse_manifest(self.config.manifest)
        return self._manifest

    def trace_dict(self) -> Optional[dict]:
        """Current trace as a JSON-ready dict: final if done, else partial."""
        for name in (TRACE_FILE, PARTIAL_TRACE_FILE):
            path = self.dir / name
            if path.is_file():
                return json.loads(path.read_text(encoding="utf-8"))
        return None

    # -- selection entry points ----------------------------------------

    def candidate_count(self, frame: int) -> int:
        return len(self.manifest.frame(frame).candidates)

    def select(self, frame: int, candidate: int) -> str:
        """Record a human selection for the pending frame and advance.

        Raises PhaseError when the session is not waiting on that frame,
        ValidationError when the candidate index is out of range; state is
        untouched in both cases.
        """
        expecting = (
            (self.phase == AWAITING_INITIAL and frame == 0)
            or (self.phase == AWAITING_RESELECTION and frame == self.pending_frame)
        )
        if not expecting:
            raise PhaseError(
                f"session is in phase {self.phase!r}"
                + (f" (pending frame {self.pending_frame})" if self.pending_frame is not None else "")
                + f", cannot accept a selection for frame {frame}"
            )
        n = self.candidate_count(frame)
        if not 0 <= candidate < n:
            raise ValidationError(f"candidate {candidate} out of range, frame {frame} has {n}")
        self.selections[frame] = candidate
        self.save()
        return self.advance()

    # -- the run itself -------------------------------------------------

    def _stored_resolver(self, frame: int, candidates, reference) -> int:
        try:
            return self.selections[frame]
        except KeyError:
            raise ReselectionRequired(frame) from None

    def _run_tracking(self) -> Optional[TrackingTrace]:
        on_reselect = "auto" if self.config.on_reselect == "auto" else self._stored_resolver
        try:
            trace = track(
                self.manifest.iter_candidate_masks(),
                self.config.policy,
                self.selections[0],
                on_reselect=on_reselect,
            )
        except ReselectionRequired as pending:
            if pending.partial is not None:
                (self.dir / PARTIAL_TRACE_FILE).write_text(
                    dump_json(pending.partial.to_dict()), encoding="utf-8"
                )
            self.phase = AWAITING_RESELECTION
            self.pending_frame = pending.frame
            self.save()
            return None
        (self.dir / TRACE_FILE).write_text(dump_json(trace.to_dict()), encoding="utf-8")
        (self.dir / PARTIAL_TRACE_FILE).unlink(missing_ok=True)
        return trace

    def _labels_trace_dict(self) -> dict:
        labels = sorted(self.config.labels)
        frames = []
        for i in range(self.manifest.frame_count):
            n = len(self.manifest.frame(i).candidates)
            frames.append({"frame": i, "retained": [x for x in labels if x < n]})
        return {"version": 1, "mode": "labels", "labels": labels, "frames": frames}

    def _composite(self, trace: Optional[TrackingTrace]) -> int:
        background = list_frame_dir(self.config.background)
        mode = (
            TrackedMode(trace)
            if trace is not None
            else LabelSetMode(frozenset(self.config.labels))
        )
        job = CompositeJob(
            foreground=self.manifest,
            background=background,
            mode=mode,
            mismatch=self.config.mismatch,
            output=self.dir / OUTPUTS_DIR,
        )
        return composite_sequence(job)

    def _write_report(self, trace: Optional[TrackingTrace], output_count: int) -> None:
        report: dict = {"version": 1, "mode": self.config.mode}
        if trace is not None:
            chosen = [e.iou for e in trace.entries if e.chosen_index is not None]
            counts = {kind: 0 for kind in ("reselected", "auto_picked", "no_candidates")}
            for ev in trace.events:
                counts[ev.kind] += 1
            report["policy"] = self.config.policy.to_dict()
            report["events"] = counts
            report["mean_iou_to_reference"] = sum(chosen) / len(chosen) if chosen else None
        else:
            report["labels"] = sorted(self.config.labels)
        report["frame_count"] = self.manifest.frame_count
        report["output_count"] = output_count
        report["mismatch"] = self.config.mismatch
        report["config_fingerprint"] = self.config.fingerprint()
        (self.dir / REPORT_FILE).write_text(dump_json(report), encoding="utf-8")

    def advance(self) -> str:
        """Push the session as far as it can go without a human answer."""
        if self.phase in (DONE, FAILED):
            return self.phase
        try:
            trace: Optional[TrackingTrace] = None
            if self.config.mode == "tracked":
                if 0 not in self.selections:
                    self.phase = AWAITING_INITIAL
                    self.pending_frame = 0
                    self.save()
                    return self.phase
                self.phase = TRACKING
                self.pending_frame = None
                self.save()
                trace = self._run_tracking()
                if trace is None:
                    return self.phase
            else:
                (self.dir / TRACE_FILE).write_text(
                    dump_json(self._labels_trace_dict()), encoding="utf-8"
                )
            self.phase = COMPOSITING
            self.pending_frame = None
            self.save()
            count = self._composite(trace)
            self._write_report(trace, count)
            self.phase = DONE
            self.save()
            return self.phase
        except ReselectionRequired:
            raise
        except MaskflowError as exc:
            self.phase = FAILED
            self.failure_reason = str(exc)
            self.save()
            raise
