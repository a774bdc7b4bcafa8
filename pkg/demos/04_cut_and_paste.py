"""Cut the tracked object out and paste it onto another clip.

The cutout sets alpha to 255 exactly inside the mask and 0 outside; the
paste picks the foreground pixel wherever alpha is set, otherwise the
background pixel. No blending, no feathering: every output pixel comes
verbatim from one of the two sources.
"""

import tempfile
from pathlib import Path

from maskflow import (
    CompositeJob,
    TrackedMode,
    TrackingPolicy,
    composite_sequence,
    cutout,
    overlay,
    parse_manifest,
    track,
)
from maskflow.manifest import list_frame_dir
from maskflow.synthetic import (
    solid_frame,
    square_mask,
    translating_square_fixture,
    write_background_dir,
)

root = Path(tempfile.mkdtemp(prefix="maskflow_paste_"))

# Single-image version first: mask -> RGBA cutout -> paste.
frame = solid_frame(12, 8, (200, 40, 40))
mask = square_mask(12, 8, 3, 2, 4)
rgba = cutout(frame, mask)
print("cutout alpha plane (255 = object kept):")
print(rgba[:, :, 3])

pasted = overlay(solid_frame(12, 8, (0, 0, 90)), rgba)
print("pasted red channel (object on blue background):")
print(pasted[:, :, 0])
print()

# Whole-clip version: 10 foreground frames, only 6 background frames.
# The loop policy wraps the background so the foreground is never cut
# short; truncate and hold are the alternatives.
fg = translating_square_fixture(root / "fg", n_frames=10)
manifest = parse_manifest(fg.manifest_path)
bg = write_background_dir(root / "bg", 6, 64, 64)
trace = track(manifest.iter_candidate_masks(), TrackingPolicy.previous_frame(),
              fg.gt_indices[0])

for policy in ("loop", "hold", "truncate"):
    out = root / f"out_{policy}"
    count = composite_sequence(
        CompositeJob(manifest, list_frame_dir(bg), TrackedMode(trace), policy, out)
    )
    print(f"{policy:<9} -> {count} frames in {out}")
