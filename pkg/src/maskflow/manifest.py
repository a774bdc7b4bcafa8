"""On-disk formats: the candidate manifest, mask images, and frame images.

The manifest is a version-1 JSON index that ties every frame of a clip to
its candidate masks plus optional per-candidate metadata (label, area,
bbox, predicted_iou, stability_score, point_coords, crop_box). It is the
boundary between this engine and whatever produced the masks: any
segmenter that can write this file can feed the pipeline.

All paths inside a manifest are relative to the manifest's directory, so
a session directory can be moved around freely. Mask files are 8-bit
grayscale images (0 background, nonzero foreground); a candidate may
instead carry its pixels inline as run-length counts ("encoding": "rle").
Serialization is deterministic: fixed key order, floats via repr (full
round-trip precision), two-space indent, trailing newline.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import FormatError, MissingAsset, ValidationError
from .mask import BBox, BinaryMask, area, rle_decode, rle_encode, tight_bbox

MANIFEST_VERSION = 1


def frame_filename(index: int) -> str:
    """Zero-padded six-digit frame name, lexicographic order == frame order."""
    return f"{index:06d}.png"


# ---------------------------------------------------------------------------
# Mask and frame images
# ---------------------------------------------------------------------------

def load_mask_image(path) -> BinaryMask:
    """Read an 8-bit single-channel image as a mask: 0 stays 0, any nonzero is 1."""
    path = Path(path)
    try:
        with Image.open(path) as img:
            if img.mode != "L":
                raise FormatError(
                    f"mask image must be 8-bit single-channel, got mode {img.mode!r}: {path}"
                )
            arr = np.asarray(img, dtype=np.uint8)
    except UnidentifiedImageError as exc:
        raise FormatError(f"not an image file: {path}") from exc
    return BinaryMask(arr != 0)


def write_mask_image(m: BinaryMask, path) -> None:
    """Write a mask as 0/255 grayscale; load_mask_image inverts this exactly."""
    arr = np.where(m.to_array(), 255, 0).astype(np.uint8)
    Image.fromarray(arr, mode="L").save(Path(path), format="PNG")


def load_frame(path, rgba: bool = False) -> np.ndarray:
    """Read an 8-bit RGB or RGBA frame as a (h, w, 3|4) uint8 array.

    With ``rgba=True`` an RGB frame gains an implicit alpha plane of 255.
    """
    path = Path(path)
    try:
        with Image.open(path) as img:
            if img.mode not in ("RGB", "RGBA"):
                raise FormatError(
                    f"frame must be 8-bit RGB or RGBA, got mode {img.mode!r}: {path}"
                )
            arr = np.asarray(img, dtype=np.uint8)
    except UnidentifiedImageError as exc:
        raise FormatError(f"not an image file: {path}") from exc
    if rgba and arr.shape[2] == 3:
        alpha = np.full(arr.shape[:2] + (1,), 255, dtype=np.uint8)
        arr = np.concatenate([arr, alpha], axis=2)
    return arr


def write_frame(raster: np.ndarray, path) -> None:
    """Write a (h, w, 3) or (h, w, 4) uint8 raster as PNG, losslessly."""
    arr = np.asarray(raster, dtype=np.uint8)
    if arr.ndim != 3 or arr.shape[2] not in (3, 4):
        raise FormatError(f"raster must be (h, w, 3) or (h, w, 4), got shape {arr.shape}")
    mode = "RGB" if arr.shape[2] == 3 else "RGBA"
    Image.fromarray(arr, mode=mode).save(Path(path), format="PNG")


def list_frame_dir(directory) -> list[Path]:
    """PNG files of a frame directory in lexicographic (frame) order."""
    directory = Path(directory)
    if not directory.is_dir():
        raise MissingAsset(directory)
    return sorted(p for p in directory.iterdir() if p.suffix.lower() == ".png")


# ---------------------------------------------------------------------------
# Manifest model
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CandidateMeta:
    """Optional per-candidate metadata, preserved verbatim across round trips."""

    label: Optional[str] = None
    area: Optional[int] = None
    bbox: Optional[BBox] = None
    predicted_iou: Optional[float] = None
    stability_score: Optional[float] = None
    point_coords: Optional[tuple[tuple[float, float], ...]] = None
    crop_box: Optional[BBox] = None


@dataclass(frozen=True)
class Candidate:
    """One proposed mask: either a mask image path or inline RLE counts."""

    mask_path: Optional[str] = None
    rle: Optional[tuple[int, ...]] = None
    meta: CandidateMeta = field(default_factory=CandidateMeta)

    def __post_init__(self) -> None:
        if (self.mask_path is None) == (self.rle is None):
            raise ValidationError("candidate needs exactly one of mask_path or rle")

    def load_mask(self, root: Path, width: int, height: int) -> BinaryMask:
        if self.rle is not None:
            return rle_decode(width, height, self.rle)
        path = root / self.mask_path
        if not path.is_file():
            raise MissingAsset(path)
        return load_mask_image(path)


@dataclass(frozen=True)
class FrameCandidates:
    frame_index: int
    image_path: str
    candidates: tuple[Candidate, ...] = ()


@dataclass
class Manifest:
    width: int
    height: int
    frames: list[FrameCandidates]
    version: int = MANIFEST_VERSION
    # directory all relative paths resolve against; not serialized
    root: Optional[Path] = field(default=None, compare=False)

    @property
    def frame_count(self) -> int:
        return len(self.frames)

    def frame(self, index: int) -> FrameCandidates:
        if not 0 <= index < len(self.frames):
            raise ValidationError(f"frame index {index} out of range 0..{len(self.frames) - 1}")
        return self.frames[index]

    def _root(self) -> Path:
        if self.root is None:
            raise ValidationError("manifest has no root directory; parse it from disk first")
        return self.root

    def frame_image(self, index: int, rgba: bool = False) -> np.ndarray:
        path = self._root() / self.frame(index).image_path
        if not path.is_file():
            raise MissingAsset(path)
        return load_frame(path, rgba=rgba)

    def frame_image_path(self, index: int) -> Path:
        return self._root() / self.frame(index).image_path

    def candidate_masks(self, index: int) -> list[BinaryMask]:
        root = self._root()
        return [c.load_mask(root, self.width, self.height) for c in self.frame(index).candidates]

    def candidate_mask(self, frame_index: int, candidate_index: int) -> BinaryMask:
        frame = self.frame(frame_index)
        if not 0 <= candidate_index < len(frame.candidates):
            raise ValidationError(
                f"frame {frame_index} has {len(frame.candidates)} candidates, "
                f"index {candidate_index} is out of range"
            )
        return frame.candidates[candidate_index].load_mask(self._root(), self.width, self.height)

    def iter_candidate_masks(self):
        """Yield the candidate mask list of every frame in order."""
        for i in range(len(self.frames)):
            yield self.candidate_masks(i)


# ---------------------------------------------------------------------------
# Parse / write
# ---------------------------------------------------------------------------

def _parse_meta(raw: dict, where: str) -> CandidateMeta:
    def opt_float(key):
        v = raw.get(key)
        if v is None:
            return None
        if not isinstance(v, (int, float)) or isinstance(v, bool):
            raise ValidationError(f"{where}: {key} must be a number")
        return float(v)

    label = raw.get("label")
    if label is not None and not isinstance(label, str):
        raise ValidationError(f"{where}: label must be a string")
    declared_area = raw.get("area")
    if declared_area is not None:
        if not isinstance(declared_area, int) or isinstance(declared_area, bool) or declared_area < 0:
            raise ValidationError(f"{where}: area must be a non-negative integer")
    bbox = BBox.from_list(raw["bbox"]) if raw.get("bbox") is not None else None
    crop_box = BBox.from_list(raw["crop_box"]) if raw.get("crop_box") is not None else None
    point_coords = None
    if raw.get("point_coords") is not None:
        pts = raw["point_coords"]
        if not isinstance(pts, list) or any(len(p) != 2 for p in pts):
            raise ValidationError(f"{where}: point_coords must be a list of [x, y] pairs")
        point_coords = tuple((float(p[0]), float(p[1])) for p in pts)
    return CandidateMeta(
        label=label,
        area=declared_area,
        bbox=bbox,
        predicted_iou=opt_float("predicted_iou"),
        stability_score=opt_float("stability_score"),
        point_coords=point_coords,
        crop_box=crop_box,
    )


def _parse_candidate(raw: dict, where: str) -> Candidate:
    mask_path = raw.get("mask_path")
    runs = None
    if raw.get("encoding") == "rle":
        if not isinstance(raw.get("rle"), list):
            raise FormatError(f"{where}: rle encoding declared but no run list given")
        runs = tuple(int(r) for r in raw["rle"])
    if (mask_path is None) == (runs is None):
        raise ValidationError(f"{where}: candidate needs exactly one of mask_path or rle")
    return Candidate(mask_path=mask_path, rle=runs, meta=_parse_meta(raw, where))


def parse_manifest(path, check_assets: bool = True) -> Manifest:
    """Load and fully validate a manifest.

    With ``check_assets`` (the default) every referenced file is opened,
    every mask is checked against the manifest dimensions, and declared
    area/bbox metadata is checked against the decoded pixels.
    """
    path = Path(path)
    if not path.is_file():
        raise MissingAsset(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"malformed JSON at line {exc.lineno}: {exc.msg} ({path})") from exc
    if not isinstance(data, dict):
        raise FormatError(f"manifest must be a JSON object: {path}")
    if data.get("version") != MANIFEST_VERSION:
        raise ValidationError(f"unsupported manifest version {data.get('version')!r}")
    try:
        width = int(data["width"])
        height = int(data["height"])
        declared_count = int(data["frame_count"])
        raw_frames = data["frames"]
    except KeyError as exc:
        raise ValidationError(f"manifest missing required key {exc.args[0]!r}") from exc
    if width < 1 or height < 1:
        raise ValidationError(f"manifest dimensions must be positive, got {width}x{height}")
    if not isinstance(raw_frames, list):
        raise ValidationError("manifest frames must be a list")
    if declared_count != len(raw_frames):
        raise ValidationError(
            f"frame_count is {declared_count} but manifest lists {len(raw_frames)} frames"
        )

    frames: list[FrameCandidates] = []
    for i, raw in enumerate(raw_frames):
        idx = raw.get("frame_index")
        if idx != i:
            raise ValidationError(f"frame indices must be contiguous from 0: missing index {i}")
        image_path = raw.get("image_path")
        if not isinstance(image_path, str) or not image_path:
            raise ValidationError(f"frame {i}: image_path must be a non-empty string")
        cands = tuple(
            _parse_candidate(c, f"frame {i} candidate {j}")
            for j, c in enumerate(raw.get("candidates", []))
        )
        frames.append(FrameCandidates(frame_index=i, image_path=image_path, candidates=cands))

    manifest = Manifest(width=width, height=height, frames=frames, root=path.parent)
    if check_assets:
        validate_assets(manifest)
    return manifest


def validate_assets(manifest: Manifest) -> None:
    """Check referenced files exist and metadata agrees with the pixels."""
    root = manifest._root()
    for frame in manifest.frames:
        if not (root / frame.image_path).is_file():
            raise MissingAsset(root / frame.image_path)
        for j, cand in enumerate(frame.candidates):
            where = f"frame {frame.frame_index} candidate {j}"
            mask = cand.load_mask(root, manifest.width, manifest.height)
            if (mask.width, mask.height) != (manifest.width, manifest.height):
                raise ValidationError(
                    f"{where}: mask is {mask.width}x{mask.height}, "
                    f"manifest declares {manifest.width}x{manifest.height}"
                )
            if cand.meta.area is not None and cand.meta.area != area(mask):
                raise ValidationError(
                    f"{where}: declared area {cand.meta.area} != mask area {area(mask)}"
                )
            if cand.meta.bbox is not None and cand.meta.bbox != tight_bbox(mask):
                actual = tight_bbox(mask)
                raise ValidationError(
                    f"{where}: declared bbox {cand.meta.bbox.to_list()} != tight bbox "
                    f"{actual.to_list() if actual else None}"
                )


def _meta_dict(meta: CandidateMeta) -> dict:
    out: dict = {}
    if meta.label is not None:
        out["label"] = meta.label
    if meta.area is not None:
        out["area"] = meta.area
    if meta.bbox is not None:
        out["bbox"] = meta.bbox.to_list()
    if meta.predicted_iou is not None:
        out["predicted_iou"] = meta.predicted_iou
    if meta.stability_score is not None:
        out["stability_score"] = meta.stability_score
    if meta.point_coords is not None:
        out["point_coords"] = [[x, y] for x, y in meta.point_coords]
    if meta.crop_box is not None:
        out["crop_box"] = meta.crop_box.to_list()
    return out


def manifest_to_dict(m: Manifest) -> dict:
    frames = []
    for frame in m.frames:
        cands = []
        for cand in frame.candidates:
            d: dict = {}
            if cand.mask_path is not None:
                d["mask_path"] = cand.mask_path
            else:
                d["encoding"] = "rle"
                d["rle"] = list(cand.rle)
            d.update(_meta_dict(cand.meta))
            cands.append(d)
        frames.append(
            {
                "frame_index": frame.frame_index,
                "image_path": frame.image_path,
                "candidates": cands,
            }
        )
    return {
        "version": m.version,
        "width": m.width,
        "height": m.height,
        "frame_count": m.frame_count,
        "frames": frames,
    }


def dump_json(data: dict) -> str:
    """Canonical JSON used for every artifact this package writes."""
    return json.dumps(data, indent=2, ensure_ascii=False) + "\n"


def write_manifest(m: Manifest, path) -> None:
    """Serialize deterministically; writing the same value twice is byte-identical."""
    Path(path).write_text(dump_json(manifest_to_dict(m)), encoding="utf-8")


def rle_candidate(mask: BinaryMask, meta: CandidateMeta = CandidateMeta()) -> Candidate:
    """Convenience constructor for an inline-RLE candidate."""
    return Candidate(rle=tuple(rle_encode(mask)), meta=meta)


def with_root(m: Manifest, root) -> Manifest:
    return replace(m, root=Path(root))
