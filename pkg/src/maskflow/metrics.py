"""Segmentation quality calculators: class-wise mean IoU and the panoptic
quality family (PQ / SQ / RQ), plus trace scoring against ground truth.

Matching for the panoptic metrics is the strict-majority rule: a predicted
and a ground-truth segment match when their IoU exceeds 0.5. Because the
segments inside each input are pairwise disjoint, every segment can clear
that bar with at most one partner, so the matching is unique without any
assignment search.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from .errors import DimensionMismatch, ValidationError
from .manifest import Manifest
from .mask import BinaryMask, area, iou
from .tracking import TrackingTrace

Segments = Union[Mapping[object, BinaryMask], Sequence[BinaryMask]]


def _as_masks(segments: Segments) -> list[BinaryMask]:
    if isinstance(segments, Mapping):
        return list(segments.values())
    return list(segments)


def _check_common_dims(masks: Sequence[BinaryMask], what: str) -> None:
    dims = {(m.width, m.height) for m in masks}
    if len(dims) > 1:
        raise DimensionMismatch(f"{what}: masks disagree on dimensions: {sorted(dims)}")


def _check_disjoint(masks: Sequence[BinaryMask], what: str) -> None:
    if len(masks) < 2:
        return
    acc = np.zeros((masks[0].height, masks[0].width), dtype=np.uint32)
    for m in masks:
        acc += m.to_array()
    if int(acc.max()) > 1:
        raise ValidationError(f"{what}: segments overlap, panoptic input must be disjoint")


def mean_iou(
    pred: Mapping[object, BinaryMask],
    gt: Mapping[object, BinaryMask],
    classes=None,
) -> Optional[float]:
    """Mean of per-class IoU over the evaluated classes.

    A class absent from both inputs is excluded from the mean (it carries
    no evidence either way); a class present on one side only scores 0.
    Returns None when nothing is evaluable.
    """
    all_masks = list(pred.values()) + list(gt.values())
    _check_common_dims(all_masks, "mean_iou")
    if classes is None:
        classes = set(pred) | set(gt)
    scores = per_class_iou(pred, gt, classes)
    if not scores:
        return None
    return sum(scores.values()) / len(scores)


def per_class_iou(
    pred: Mapping[object, BinaryMask],
    gt: Mapping[object, BinaryMask],
    classes=None,
) -> dict:
    """Per-class IoU for classes with pixels in at least one input."""
    if classes is None:
        classes = set(pred) | set(gt)
    scores = {}
    for c in classes:
        p = pred.get(c)
        g = gt.get(c)
        p_empty = p is None or area(p) == 0
        g_empty = g is None or area(g) == 0
        if p_empty and g_empty:
            continue
        if p is None or g is None:
            scores[c] = 0.0
        else:
            scores[c] = iou(p, g)
    return scores


@dataclass(frozen=True)
class PanopticReport:
    pq: float
    sq: float
    rq: float
    tp: int
    fp: int
    fn: int
    matched_iou_sum: float

    def to_dict(self) -> dict:
        return {
            "pq": self.pq,
            "sq": self.sq,
            "rq": self.rq,
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "matched_iou_sum": self.matched_iou_sum,
        }


def panoptic_quality(pred: Segments, gt: Segments) -> PanopticReport:
    """Match segments at IoU > 0.5 and report PQ, SQ, RQ and the counts.

    SQ is the mean IoU over matched pairs, RQ the F1-style recognition
    term TP / (TP + FP/2 + FN/2), and PQ their product. All three are 0
    when there is nothing to match on either side.
    """
    pred_masks = _as_masks(pred)
    gt_masks = _as_masks(gt)
    _check_common_dims(pred_masks + gt_masks, "panoptic_quality")
    _check_disjoint(pred_masks, "prediction")
    _check_disjoint(gt_masks, "ground truth")

    matched_pred: set[int] = set()
    matched_gt: set[int] = set()
    iou_sum = 0.0
    for i, p in enumerate(pred_masks):
        for j, g in enumerate(gt_masks):
            if j in matched_gt:
                continue
            score = iou(p, g)
            if score > 0.5:
                matched_pred.add(i)
                matched_gt.add(j)
                iou_sum += score
                break

    tp = len(matched_pred)
    fp = len(pred_masks) - tp
    fn = len(gt_masks) - tp
    denom = tp + 0.5 * fp + 0.5 * fn
    if denom == 0:
        return PanopticReport(0.0, 0.0, 0.0, 0, 0, 0, 0.0)
    sq = iou_sum / tp if tp > 0 else 0.0
    rq = tp / denom
    pq = iou_sum / denom
    return PanopticReport(pq, sq, rq, tp, fp, fn, iou_sum)


def trace_vs_ground_truth(
    trace: TrackingTrace,
    manifest: Manifest,
    gt: Sequence[BinaryMask],
) -> tuple[list[Optional[float]], Optional[float]]:
    """Score each frame's chosen mask against per-frame ground truth.

    A frame with no choice scores 0 against a nonempty ground truth and is
    skipped (None) when the ground truth is empty too. Returns the
    per-frame list and the mean over scored frames (None if none scored).
    """
    if len(trace.entries) != len(gt) or len(gt) != manifest.frame_count:
        raise ValidationError(
            f"lengths disagree: trace {len(trace.entries)}, ground truth {len(gt)}, "
            f"manifest {manifest.frame_count}"
        )
    per_frame: list[Optional[float]] = []
    for entry, truth in zip(trace.entries, gt):
        if entry.chosen_index is None:
            per_frame.append(0.0 if area(truth) > 0 else None)
        else:
            chosen = manifest.candidate_mask(entry.frame, entry.chosen_index)
            per_frame.append(iou(chosen, truth))
    scored = [v for v in per_frame if v is not None]
    mean = sum(scored) / len(scored) if scored else None
    return per_frame, mean
