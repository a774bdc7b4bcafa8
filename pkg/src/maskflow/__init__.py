"""maskflow: propagate a chosen segmentation mask across video frames by
IoU matching, cut the object out with a transparent background, and paste
it onto a second frame sequence. Includes segmentation quality metrics
(mean IoU, PQ/SQ/RQ), a resumable run session, a CLI and a local HTTP
service for interactive mask selection.
"""

from .compositing import (
    CompositeJob,
    LabelSetMode,
    TrackedMode,
    background_index,
    background_mask_for_inpainting,
    composite_sequence,
    cutout,
    output_length,
    overlay,
    union_labels,
)
from .errors import (
    DimensionMismatch,
    FormatError,
    MaskflowError,
    MissingAsset,
    PhaseError,
    ReselectionRequired,
    ValidationError,
)
from .manifest import (
    Candidate,
    CandidateMeta,
    FrameCandidates,
    Manifest,
    frame_filename,
    list_frame_dir,
    load_frame,
    load_mask_image,
    parse_manifest,
    write_frame,
    write_manifest,
    write_mask_image,
)
from .mask import (
    BBox,
    BinaryMask,
    area,
    invert,
    iou,
    resize_nearest,
    rle_decode,
    rle_encode,
    tight_bbox,
)
from .metrics import PanopticReport, mean_iou, panoptic_quality, per_class_iou, trace_vs_ground_truth
from .preview import blend_mask, palette_color, render_overlay
from .session import RunConfig, Session
from .tracking import (
    TrackingPolicy,
    TrackingTrace,
    choose_mask,
    needs_reselection,
    track,
)

__version__ = "0.1.0"

__all__ = [
    "BBox",
    "BinaryMask",
    "Candidate",
    "CandidateMeta",
    "CompositeJob",
    "DimensionMismatch",
    "FormatError",
    "FrameCandidates",
    "LabelSetMode",
    "Manifest",
    "MaskflowError",
    "MissingAsset",
    "PanopticReport",
    "PhaseError",
    "ReselectionRequired",
    "RunConfig",
    "Session",
    "TrackedMode",
    "TrackingPolicy",
    "TrackingTrace",
    "ValidationError",
    "area",
    "background_index",
    "background_mask_for_inpainting",
    "blend_mask",
    "choose_mask",
    "composite_sequence",
    "cutout",
    "frame_filename",
    "invert",
    "iou",
    "list_frame_dir",
    "load_frame",
    "load_mask_image",
    "mean_iou",
    "needs_reselection",
    "output_length",
    "overlay",
    "palette_color",
    "panoptic_quality",
    "parse_manifest",
    "per_class_iou",
    "render_overlay",
    "resize_nearest",
    "rle_decode",
    "rle_encode",
    "tight_bbox",
    "trace_vs_ground_truth",
    "track",
    "union_labels",
    "write_frame",
    "write_manifest",
    "write_mask_image",
]
