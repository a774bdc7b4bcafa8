"""Tour of the binary mask kernels.

A mask is a 0/1 pixel grid: 1 marks the object, 0 the rest. Every other
capability (tracking, cutout, metrics) reduces to a handful of operations
on these grids, shown here one by one.
"""

import numpy as np

from maskflow import (
    BinaryMask,
    area,
    invert,
    iou,
    resize_nearest,
    rle_decode,
    rle_encode,
    tight_bbox,
)

# Build two overlapping square masks on a 12x8 grid.
a = np.zeros((8, 12), dtype=bool)
a[1:5, 1:7] = True
b = np.zeros((8, 12), dtype=bool)
b[2:7, 4:10] = True
mask_a = BinaryMask(a)
mask_b = BinaryMask(b)

print("mask A:", mask_a)
print("mask B:", mask_b)

# IoU is the overlap area divided by the union area, the quantity the
# tracker maximizes when it matches candidates to a reference.
print(f"iou(A, B)      = {iou(mask_a, mask_b):.4f}")
print(f"iou(A, A)      = {iou(mask_a, mask_a):.4f}   (identical masks)")

# Inversion flips object and background; applying it twice is a no-op.
flipped = invert(mask_a)
print(f"area(A)        = {area(mask_a)}")
print(f"area(~A)       = {area(flipped)}  (complement: {area(mask_a)} + {area(flipped)} = {12 * 8})")
print("invert twice   =", invert(flipped) == mask_a)

# The tight bounding box is the smallest box holding every set pixel.
print("tight_bbox(A)  =", tight_bbox(mask_a).to_list())

# Nearest-neighbor resize keeps the mask strictly binary. Upscaling a
# checkerboard turns each source pixel into a solid block.
checker = BinaryMask.from_bits(2, 2, [1, 0, 0, 1])
big = resize_nearest(checker, 6, 6)
print("2x2 checkerboard at 6x6:")
print(big.to_array().astype(int))

# Run-length encoding stores the flat row-major bits as alternating run
# lengths, starting with the count of leading zeros.
runs = rle_encode(mask_a)
print("rle(A)         =", runs)
print("decode(rle(A)) == A:", rle_decode(mask_a.width, mask_a.height, runs) == mask_a)
