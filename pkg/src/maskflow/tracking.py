"""Per-frame candidate selection against a reference mask.

Three reference policies are supported:

* ``previous``: the reference for frame t is the mask chosen at frame
  t-1 (falling back to the most recent frame that had a choice).
* ``first``: the reference is always the mask chosen at frame 0.
* ``adaptive``: starts from the frame-0 choice; when the best candidate
  IoU drops strictly below ``tau`` the run asks for a re-selection, and
  with ``period`` set the reference is refreshed to the current chosen
  mask every N frames. Both triggers act independently.

Every frame's trace entry records which frame the scoring reference came
from and the IoU of the chosen mask against that reference, so the whole
run can be re-verified after the fact. Frame 0 is its own reference with
IoU 1.0 by definition.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

from .errors import ReselectionRequired, ValidationError
from .mask import BinaryMask, iou, resize_nearest

POLICY_KINDS = ("previous", "first", "adaptive")

# trace event kinds
RESELECTED = "reselected"
AUTO_PICKED = "auto_picked"
NO_CANDIDATES = "no_candidates"

DEFAULT_TAU = 0.5

Resolver = Callable[[int, Sequence[BinaryMask], BinaryMask], int]
OnReselect = Union[str, Resolver]


@dataclass(frozen=True)
class TrackingPolicy:
    """Reference policy configuration.

    ``tau`` is only meaningful (and only allowed) for the adaptive kind;
    ``period``, when set, forces a reference refresh every N frames.
    """

    kind: str
    tau: Optional[float] = None
    period: Optional[int] = None

    def __post_init__(self) -> None:
        if self.kind not in POLICY_KINDS:
            raise ValidationError(f"unknown policy kind {self.kind!r}, expected one of {POLICY_KINDS}")
        if self.kind == "adaptive":
            if self.tau is None:
                object.__setattr__(self, "tau", DEFAULT_TAU)
            if not 0.0 <= self.tau <= 1.0:
                raise ValidationError(f"tau must be in [0, 1], got {self.tau}")
            if self.period is not None and self.period < 1:
                raise ValidationError(f"period must be >= 1, got {self.period}")
        else:
            if self.tau is not None:
                raise ValidationError(f"tau only applies to the adaptive policy, not {self.kind!r}")
            if self.period is not None:
                raise ValidationError(f"period only applies to the adaptive policy, not {self.kind!r}")

    @classmethod
    def previous_frame(cls) -> "TrackingPolicy":
        return cls(kind="previous")

    @classmethod
    def first_frame(cls) -> "TrackingPolicy":
        return cls(kind="first")

    @classmethod
    def adaptive(cls, tau: float = DEFAULT_TAU, period: Optional[int] = None) -> "TrackingPolicy":
        return cls(kind="adaptive", tau=tau, period=period)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "tau": self.tau, "period": self.period}

    @classmethod
    def from_dict(cls, data: dict) -> "TrackingPolicy":
        return cls(kind=data["kind"], tau=data.get("tau"), period=data.get("period"))


@dataclass(frozen=True)
class TraceEntry:
    frame: int
    chosen_index: Optional[int]
    iou: float
    reference_frame: int


@dataclass(frozen=True)
class TraceEvent:
    frame: int
    kind: str


@dataclass
class TrackingTrace:
    policy: TrackingPolicy
    entries: list[TraceEntry] = field(default_factory=list)
    events: list[TraceEvent] = field(default_factory=list)

    def entry(self, frame: int) -> TraceEntry:
        return self.entries[frame]

    def selection_record(self) -> list[tuple]:
        """Policy-independent view: per-frame choices plus the event log.

        Two runs are behaviorally equivalent when these records match,
        regardless of where each policy sourced its reference masks.
        """
        return [(e.frame, e.chosen_index, e.iou) for e in self.entries] + [
            (ev.frame, ev.kind) for ev in self.events
        ]

    def to_dict(self) -> dict:
        return {
            "version": 1,
            "policy": self.policy.to_dict(),
            "frames": [
                {
                    "frame": e.frame,
                    "chosen_index": e.chosen_index,
                    "iou": e.iou,
                    "reference_frame": e.reference_frame,
                }
                for e in self.entries
            ],
            "events": [{"frame": ev.frame, "kind": ev.kind} for ev in self.events],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TrackingTrace":
        trace = cls(policy=TrackingPolicy.from_dict(data["policy"]))
        for e in data["frames"]:
            trace.entries.append(
                TraceEntry(
                    frame=e["frame"],
                    chosen_index=e["chosen_index"],
                    iou=e["iou"],
                    reference_frame=e["reference_frame"],
                )
            )
        for ev in data.get("events", []):
            trace.events.append(TraceEvent(frame=ev["frame"], kind=ev["kind"]))
        return trace


def choose_mask(candidates: Sequence[BinaryMask], reference: BinaryMask) -> tuple[int, float]:
    """Index and IoU of the candidate overlapping the reference most.

    Ties break to the lowest index. Candidates must already match the
    reference dimensions; ``track`` resizes beforehand when needed.
    """
    if not candidates:
        raise ValidationError("choose_mask needs at least one candidate")
    best_index = 0
    best = -1.0
    for i, cand in enumerate(candidates):
        score = iou(cand, reference)
        if score > best:
            best = score
            best_index = i
    return best_index, best


def needs_reselection(candidates: Sequence[BinaryMask], reference: BinaryMask, tau: float) -> bool:
    """True when no candidate reaches the threshold (strictly below tau)."""
    if not 0.0 <= tau <= 1.0:
        raise ValidationError(f"tau must be in [0, 1], got {tau}")
    if not candidates:
        return True
    _, best = choose_mask(_fit_to(candidates, reference), reference)
    return best < tau


def _fit_to(candidates: Sequence[BinaryMask], reference: BinaryMask) -> list[BinaryMask]:
    return [
        c if (c.width, c.height) == (reference.width, reference.height)
        else resize_nearest(c, reference.width, reference.height)
        for c in candidates
    ]


def track(
    frames,
    policy: TrackingPolicy,
    initial_index: int,
    on_reselect: OnReselect = "fail",
) -> TrackingTrace:
    """Propagate the frame-0 choice across a clip.

    ``frames`` is an iterable of per-frame candidate mask lists (lists may
    be empty; such frames are skipped and logged). ``on_reselect`` governs
    what happens when the adaptive policy trips its threshold:

    * ``"fail"``: raise :class:`ReselectionRequired` carrying the partial
      trace, so a session can persist and resume later;
    * ``"auto"``: take the argmax anyway and log an ``auto_picked`` event;
    * a callable ``(frame, candidates, reference) -> index``: ask it and
      log a ``reselected`` event. The callable may itself raise
      :class:`ReselectionRequired` to defer.
    """
    trace = TrackingTrace(policy=policy)
    reference: Optional[BinaryMask] = None
    reference_frame = 0

    for t, candidates in enumerate(frames):
        candidates = list(candidates)
        if t == 0:
            if not candidates:
                raise ValidationError("frame 0 has no candidates to select from")
            if not 0 <= initial_index < len(candidates):
                raise ValidationError(
                    f"initial index {initial_index} out of range for {len(candidates)} candidates"
                )
            reference = candidates[initial_index]
            trace.entries.append(TraceEntry(0, initial_index, 1.0, 0))
            continue

        if not candidates:
            trace.entries.append(TraceEntry(t, None, 0.0, reference_frame))
            trace.events.append(TraceEvent(t, NO_CANDIDATES))
            continue

        fitted = _fit_to(candidates, reference)
        chosen, best = choose_mask(fitted, reference)

        if policy.kind == "adaptive" and best < policy.tau:
            if on_reselect == "fail":
                raise ReselectionRequired(t, partial=trace)
            if on_reselect == "auto":
                kind = AUTO_PICKED
            else:
                try:
                    chosen = on_reselect(t, candidates, reference)
                except ReselectionRequired:
                    raise ReselectionRequired(t, partial=trace) from None
                if not 0 <= chosen < len(candidates):
                    raise ValidationError(
                        f"resolver returned index {chosen}, frame {t} has "
                        f"{len(candidates)} candidates"
                    )
                kind = RESELECTED
            trace.entries.append(TraceEntry(t, chosen, iou(fitted[chosen], reference), reference_frame))
            trace.events.append(TraceEvent(t, kind))
            reference = candidates[chosen]
            reference_frame = t
            continue

        trace.entries.append(TraceEntry(t, chosen, best, reference_frame))
        if policy.kind == "previous":
            reference = candidates[chosen]
            reference_frame = t
        elif policy.kind == "adaptive" and policy.period and t % policy.period == 0:
            reference = candidates[chosen]
            reference_frame = t

    if not trace.entries:
        raise ValidationError("cannot track an empty frame sequence")
    return trace
