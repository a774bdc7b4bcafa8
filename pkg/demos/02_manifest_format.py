"""The candidate manifest: the file format that feeds the engine.

A manifest ties each frame of a clip to its candidate masks plus optional
metadata (label, area, bbox, proposal scores). Any segmentation backend
that can emit this JSON plus mask images can drive the pipeline; the
engine itself never loads a model.
"""

import tempfile
from pathlib import Path

from maskflow import (
    BBox,
    Candidate,
    CandidateMeta,
    FrameCandidates,
    Manifest,
    area,
    parse_manifest,
    rle_encode,
    tight_bbox,
    write_frame,
    write_manifest,
    write_mask_image,
)
from maskflow.synthetic import solid_frame, square_mask

root = Path(tempfile.mkdtemp(prefix="maskflow_manifest_"))
(root / "frames").mkdir()
(root / "masks").mkdir()

# One frame, two candidates: a labeled mask stored as a PNG file and an
# unlabeled proposal carried inline as run-length counts.
mask0 = square_mask(32, 24, 4, 4, 10)
mask1 = square_mask(32, 24, 18, 10, 8)
write_frame(solid_frame(32, 24, (120, 160, 200)), root / "frames/000000.png")
write_mask_image(mask0, root / "masks/000000_000.png")

manifest = Manifest(
    width=32,
    height=24,
    frames=[
        FrameCandidates(
            frame_index=0,
            image_path="frames/000000.png",
            candidates=(
                Candidate(
                    mask_path="masks/000000_000.png",
                    meta=CandidateMeta(label="elephant", area=area(mask0),
                                       bbox=tight_bbox(mask0)),
                ),
                Candidate(
                    rle=tuple(rle_encode(mask1)),
                    meta=CandidateMeta(
                        area=area(mask1),
                        bbox=tight_bbox(mask1),
                        predicted_iou=0.97265625,
                        stability_score=0.9912109375,
                        point_coords=((22.0, 14.0),),
                        crop_box=BBox(0, 0, 32, 24),
                    ),
                ),
            ),
        )
    ],
    root=root,
)

path = root / "manifest.json"
write_manifest(manifest, path)
print(f"wrote {path}")
print()
print(path.read_text())

# Parsing validates everything: files exist, mask dimensions match the
# manifest, declared area equals the decoded pixel count, declared bbox
# equals the tight bbox. Metadata round-trips at full precision.
parsed = parse_manifest(path)
meta = parsed.frames[0].candidates[1].meta
print("round-trip equal:", parsed == manifest)
print("proposal score preserved exactly:", meta.predicted_iou == 0.97265625)
