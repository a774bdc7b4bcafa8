"""Scoring segmentations: per-class mean IoU and the panoptic family.

mean IoU averages the per-class overlap ratio; PQ matches predicted and
ground-truth segments at IoU > 0.5 and decomposes into SQ (mean matched
IoU) times RQ (an F1-style detection term).
"""

import numpy as np

from maskflow import BinaryMask, mean_iou, panoptic_quality, per_class_iou
from maskflow.synthetic import square_mask

W = H = 32

# Semantic view: one mask per class name, horizon at row 10 vs row 12.
gt = {
    "sky": BinaryMask(np.tile(np.arange(H)[:, None] < 10, (1, W))),
    "earth": BinaryMask(np.tile(np.arange(H)[:, None] >= 10, (1, W))),
}
pred = {
    "sky": BinaryMask(np.tile(np.arange(H)[:, None] < 12, (1, W))),   # two rows too greedy
    "earth": BinaryMask(np.tile(np.arange(H)[:, None] >= 12, (1, W))),
}

print("per-class IoU:", {k: round(v, 4) for k, v in sorted(per_class_iou(pred, gt).items())})
print(f"mean IoU     : {mean_iou(pred, gt):.4f}")
print()

# Panoptic view: anonymous disjoint segments, matched at IoU > 0.5.
gt_segments = [square_mask(W, H, 2, 2, 10), square_mask(W, H, 18, 18, 10)]
pred_segments = [
    square_mask(W, H, 3, 3, 10),    # close to the first object
    square_mask(W, H, 18, 18, 10),  # exact second object
    square_mask(W, H, 2, 20, 6),    # spurious extra detection
]
report = panoptic_quality(pred_segments, gt_segments)
print(f"tp={report.tp} fp={report.fp} fn={report.fn}")
print(f"SQ = {report.sq:.4f}  (mean IoU of matched pairs)")
print(f"RQ = {report.rq:.4f}  (recognition term)")
print(f"PQ = {report.pq:.4f}  (= SQ * RQ: {report.sq * report.rq:.4f})")
