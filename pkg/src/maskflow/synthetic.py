"""Deterministic synthetic clips for tests, demos and UI development.

Everything here is seed-free: fixture content is a pure function of its
arguments, so two builds of the same fixture are byte-identical. The
builders write real session inputs (frame images, mask images and a
version-1 manifest) into a directory and return what a test needs to
verify the run afterwards.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .manifest import (
    Candidate,
    CandidateMeta,
    FrameCandidates,
    Manifest,
    frame_filename,
    write_manifest,
    write_mask_image,
    write_frame,
)
from .mask import BBox, BinaryMask, area, tight_bbox


def square_mask(width: int, height: int, x: int, y: int, size: int) -> BinaryMask:
    """Filled axis-aligned square, clipped to the grid."""
    a = np.zeros((height, width), dtype=bool)
    a[max(0, y):min(height, y + size), max(0, x):min(width, x + size)] = True
    return BinaryMask(a)


def solid_frame(width: int, height: int, color: tuple[int, int, int]) -> np.ndarray:
    return np.tile(np.array(color, dtype=np.uint8), (height, width, 1))


def frame_color(t: int) -> tuple[int, int, int]:
    """Distinct, deterministic color per frame index."""
    return ((20 + 37 * t) % 256, (80 + 61 * t) % 256, (140 + 83 * t) % 256)


def textured_frame(width: int, height: int, t: int) -> np.ndarray:
    """Per-frame deterministic texture so pixel provenance is checkable."""
    yy, xx = np.mgrid[0:height, 0:width]
    r = (xx * 3 + t * 11) % 256
    g = (yy * 5 + t * 7) % 256
    b = (xx + yy * 2 + t * 13) % 256
    return np.stack([r, g, b], axis=2).astype(np.uint8)


def mask_with_area_and_bbox(width: int, height: int, bbox: BBox, target_area: int) -> BinaryMask:
    """Construct a mask whose tight bbox and pixel count are exactly as given.

    Starts from the filled box and removes surplus pixels from the box
    interior (never touching the border rows/columns, which pin the bbox).
    """
    box_area = bbox.w * bbox.h
    interior_w = max(0, bbox.w - 2)
    interior_h = max(0, bbox.h - 2)
    surplus = box_area - target_area
    if surplus < 0 or surplus > interior_w * interior_h:
        raise ValueError(
            f"area {target_area} unreachable inside a {bbox.w}x{bbox.h} box "
            f"with its border kept intact"
        )
    a = np.zeros((height, width), dtype=bool)
    a[bbox.y:bbox.y + bbox.h, bbox.x:bbox.x + bbox.w] = True
    if surplus:
        full_rows, rest = divmod(surplus, interior_w)
        y0 = bbox.y + 1
        x0 = bbox.x + 1
        a[y0:y0 + full_rows, x0:x0 + interior_w] = False
        if rest:
            a[y0 + full_rows, x0:x0 + rest] = False
    m = BinaryMask(a)
    assert area(m) == target_area and tight_bbox(m) == bbox
    return m


# ---------------------------------------------------------------------------
# Session fixture writer
# ---------------------------------------------------------------------------

def _meta_for(mask: BinaryMask, label: Optional[str]) -> CandidateMeta:
    return CandidateMeta(label=label, area=area(mask), bbox=tight_bbox(mask))


def write_session_fixture(
    root,
    per_frame_masks: Sequence[Sequence[BinaryMask]],
    width: int,
    height: int,
    labels: Optional[Sequence[Sequence[Optional[str]]]] = None,
) -> Path:
    """Write frames/, masks/ and manifest.json under ``root``.

    ``per_frame_masks[t]`` lists frame t's candidates in display order;
    ``labels`` optionally names them. Returns the manifest path.
    """
    root = Path(root)
    (root / "frames").mkdir(parents=True, exist_ok=True)
    (root / "masks").mkdir(parents=True, exist_ok=True)
    frames = []
    for t, masks in enumerate(per_frame_masks):
        image_rel = f"frames/{frame_filename(t)}"
        write_frame(textured_frame(width, height, t), root / image_rel)
        cands = []
        for j, mask in enumerate(masks):
            mask_rel = f"masks/{t:06d}_{j:03d}.png"
            write_mask_image(mask, root / mask_rel)
            label = labels[t][j] if labels is not None else None
            cands.append(Candidate(mask_path=mask_rel, meta=_meta_for(mask, label)))
        frames.append(FrameCandidates(frame_index=t, image_path=image_rel, candidates=tuple(cands)))
    manifest = Manifest(width=width, height=height, frames=frames, root=root)
    path = root / "manifest.json"
    write_manifest(manifest, path)
    return path


def write_background_dir(root, count: int, width: int, height: int) -> Path:
    """Directory of solid frames, each a distinct deterministic color."""
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    for t in range(count):
        write_frame(solid_frame(width, height, frame_color(t)), root / frame_filename(t))
    return root


# ---------------------------------------------------------------------------
# Scenario builders
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Scenario:
    """In-memory clip: per-frame candidate lists plus the ground truth."""

    per_frame: tuple[tuple[BinaryMask, ...], ...]
    width: int
    height: int
    gt_indices: tuple[int, ...]     # where the true object sits in each frame's list
    gt_masks: tuple[BinaryMask, ...]


@dataclass(frozen=True)
class TrackingFixture:
    manifest_path: Path
    width: int
    height: int
    gt_indices: tuple[int, ...]
    gt_masks: tuple[BinaryMask, ...]


def translating_square_scenario(n_frames: int = 20, width: int = 64,
                                height: int = 64, size: int = 8) -> Scenario:
    """A square moving one pixel per frame plus three weaker distractors.

    The true candidate's position inside each frame's list is scrambled
    deterministically so a tracker that just repeats an index fails.
    """
    distractors = [
        square_mask(width, height, width - size - 2, height - size - 2, size),
        square_mask(width, height, 2, height - size - 2, size),
        square_mask(width, height, 4, 24, size),  # overlaps the object's path, IoU <= 1/3
    ]
    per_frame, gt_idx, gt_masks = [], [], []
    for t in range(n_frames):
        gt = square_mask(width, height, 4 + t, 20, size)
        slot = (t * 7) % (len(distractors) + 1)
        cands = distractors.copy()
        cands.insert(slot, gt)
        per_frame.append(tuple(cands))
        gt_idx.append(slot)
        gt_masks.append(gt)
    return Scenario(tuple(per_frame), width, height, tuple(gt_idx), tuple(gt_masks))


def static_scene_scenario(n_frames: int = 6, width: int = 64, height: int = 64) -> Scenario:
    """Identical candidate list every frame; distractors overlap the object
    but never equal it, so every policy keeps choosing the same index."""
    obj = square_mask(width, height, 24, 24, 12)
    cands = (
        square_mask(width, height, 28, 28, 12),  # shifted copy, IoU < 1
        obj,
        square_mask(width, height, 4, 4, 10),
    )
    return Scenario(
        (cands,) * n_frames, width, height, (1,) * n_frames, (obj,) * n_frames
    )


def scene_cut_scenario(n_frames: int = 8, cut: int = 5, width: int = 64,
                       height: int = 64) -> Scenario:
    """Scene A until ``cut``, then a disjoint scene B.

    At the cut every candidate is disjoint from the old reference, so an
    adaptive tracker with tau in (0, 1] must ask for a re-selection there;
    scene B is static afterwards, so it asks exactly once.
    """
    obj_a = square_mask(width, height, 8, 8, 12)
    scene_a = (
        obj_a,
        square_mask(width, height, 40, 8, 10),
        square_mask(width, height, 8, 44, 10),
    )
    obj_b = square_mask(width, height, 44, 44, 12)
    scene_b = (
        square_mask(width, height, 26, 30, 10),
        obj_b,
        square_mask(width, height, 44, 6, 10),
    )
    per_frame, gt_idx, gt_masks = [], [], []
    for t in range(n_frames):
        if t < cut:
            per_frame.append(scene_a)
            gt_idx.append(0)
            gt_masks.append(obj_a)
        else:
            per_frame.append(scene_b)
            gt_idx.append(1)
            gt_masks.append(obj_b)
    return Scenario(tuple(per_frame), width, height, tuple(gt_idx), tuple(gt_masks))


def write_scenario(root, scenario: Scenario) -> TrackingFixture:
    """Materialize a scenario as a session input directory on disk."""
    path = write_session_fixture(root, scenario.per_frame, scenario.width, scenario.height)
    return TrackingFixture(
        path, scenario.width, scenario.height, scenario.gt_indices, scenario.gt_masks
    )


def translating_square_fixture(root, n_frames: int = 20, **kw) -> TrackingFixture:
    return write_scenario(root, translating_square_scenario(n_frames, **kw))


def static_scene_fixture(root, n_frames: int = 6, **kw) -> TrackingFixture:
    return write_scenario(root, static_scene_scenario(n_frames, **kw))


def scene_cut_fixture(root, n_frames: int = 8, cut: int = 5, **kw) -> TrackingFixture:
    return write_scenario(root, scene_cut_scenario(n_frames, cut, **kw))


def labeled_scene_fixture(root, label_rows: Sequence[str], n_frames: int = 2,
                          width: int = 48, height: int = 48) -> Path:
    """A clip whose frame-0 candidates carry the given labels, one band each."""
    band = max(1, height // max(1, len(label_rows)))
    masks = []
    for i in range(len(label_rows)):
        a = np.zeros((height, width), dtype=bool)
        a[i * band:min(height, (i + 1) * band), :] = True
        masks.append(BinaryMask(a))
    per_frame = [masks] * n_frames
    labels = [list(label_rows)] * n_frames
    return write_session_fixture(root, per_frame, width, height, labels=labels)
