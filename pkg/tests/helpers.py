"""Independent brute-force oracles used to check the fast kernels.

Everything here is deliberately written as plain per-pixel Python loops
with no shared code paths into the package, so agreement between the two
is meaningful.
"""

from __future__ import annotations

import numpy as np

from maskflow import BBox, BinaryMask


def oracle_iou(a: BinaryMask, b: BinaryMask) -> float:
    inter = 0
    union = 0
    for y in range(a.height):
        for x in range(a.width):
            pa = a.get(x, y)
            pb = b.get(x, y)
            if pa and pb:
                inter += 1
            if pa or pb:
                union += 1
    if union == 0:
        return 1.0
    return inter / union


def oracle_area(m: BinaryMask) -> int:
    total = 0
    for y in range(m.height):
        for x in range(m.width):
            total += m.get(x, y)
    return total


def oracle_bbox(m: BinaryMask):
    xs = []
    ys = []
    for y in range(m.height):
        for x in range(m.width):
            if m.get(x, y):
                xs.append(x)
                ys.append(y)
    if not xs:
        return None
    return BBox(min(xs), min(ys), max(xs) - min(xs) + 1, max(ys) - min(ys) + 1)


def oracle_union(masks, width, height) -> BinaryMask:
    grid = [[0] * width for _ in range(height)]
    for m in masks:
        for y in range(height):
            for x in range(width):
                if m.get(x, y):
                    grid[y][x] = 1
    return BinaryMask(np.array(grid, dtype=bool))


def random_mask(rng: np.random.Generator, width: int, height: int, p: float = 0.5) -> BinaryMask:
    return BinaryMask(rng.random((height, width)) < p)
