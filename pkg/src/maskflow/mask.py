"""Binary mask type and the pixel kernels everything else builds on.

A mask is a 0/1 grid: pixels belonging to the object are 1, everything
else is 0. Storage is a read-only boolean numpy array in row-major order,
so the flat index of pixel (x, y) is always ``y * width + x``; every
serialization (RLE, mask images) follows that order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import DimensionMismatch, FormatError


@dataclass(frozen=True)
class BBox:
    """Axis-aligned pixel box as [x, y, w, h], origin inclusive, end exclusive."""

    x: int
    y: int
    w: int
    h: int

    def to_list(self) -> list[int]:
        return [self.x, self.y, self.w, self.h]

    @classmethod
    def from_list(cls, values: Sequence[int]) -> "BBox":
        if len(values) != 4:
            raise FormatError(f"bbox needs exactly 4 entries, got {len(values)}")
        return cls(*(int(v) for v in values))


class BinaryMask:
    """Immutable 0/1 pixel grid with explicit width and height."""

    __slots__ = ("_a",)

    def __init__(self, array) -> None:
        a = np.array(array, dtype=bool, copy=True)
        if a.ndim != 2:
            raise FormatError(f"mask must be two-dimensional, got shape {a.shape}")
        h, w = a.shape
        if h < 1 or w < 1:
            raise FormatError(f"mask needs width >= 1 and height >= 1, got {w}x{h}")
        a.setflags(write=False)
        object.__setattr__(self, "_a", a)

    @classmethod
    def from_bits(cls, width: int, height: int, bits: Iterable[int]) -> "BinaryMask":
        """Build from a flat row-major 0/1 sequence of length width * height."""
        flat = np.fromiter((1 if b else 0 for b in bits), dtype=np.uint8)
        if flat.size != width * height:
            raise FormatError(
                f"expected {width * height} bits for a {width}x{height} mask, got {flat.size}"
            )
        return cls(flat.reshape(height, width))

    @property
    def width(self) -> int:
        return self._a.shape[1]

    @property
    def height(self) -> int:
        return self._a.shape[0]

    @property
    def bits(self) -> np.ndarray:
        """Flat row-major read-only view, index y * width + x."""
        return self._a.reshape(-1)

    def to_array(self) -> np.ndarray:
        """Read-only (height, width) boolean view."""
        return self._a

    def get(self, x: int, y: int) -> int:
        return int(self._a[y, x])

    def __eq__(self, other) -> bool:
        if not isinstance(other, BinaryMask):
            return NotImplemented
        return self._a.shape == other._a.shape and bool(np.array_equal(self._a, other._a))

    def __repr__(self) -> str:
        return f"BinaryMask({self.width}x{self.height}, area={area(self)})"


def _require_same_dims(a: BinaryMask, b: BinaryMask, op: str) -> None:
    if a.width != b.width or a.height != b.height:
        raise DimensionMismatch(
            f"{op} needs masks of identical dimensions, "
            f"got {a.width}x{a.height} and {b.width}x{b.height}"
        )


def iou(a: BinaryMask, b: BinaryMask) -> float:
    """Intersection over union: area of overlap divided by area of union.

    Two empty masks are identical, so their IoU is defined as 1.0.
    """
    _require_same_dims(a, b, "iou")
    inter = int(np.count_nonzero(a.to_array() & b.to_array()))
    union = int(np.count_nonzero(a.to_array() | b.to_array()))
    if union == 0:
        return 1.0
    return inter / union


def area(m: BinaryMask) -> int:
    """Number of 1 pixels."""
    return int(np.count_nonzero(m.to_array()))


def invert(m: BinaryMask) -> BinaryMask:
    """Complement every pixel: 1 becomes 0 and 0 becomes 1."""
    return BinaryMask(~m.to_array())


def tight_bbox(m: BinaryMask) -> Optional[BBox]:
    """Smallest box containing all 1 pixels, or None for an empty mask."""
    ys, xs = np.nonzero(m.to_array())
    if ys.size == 0:
        return None
    x0, x1 = int(xs.min()), int(xs.max())
    y0, y1 = int(ys.min()), int(ys.max())
    return BBox(x0, y0, x1 - x0 + 1, y1 - y0 + 1)


def nearest_indices(src_extent: int, dst_extent: int) -> np.ndarray:
    """Source index per destination index: floor(dst * src / dst_extent)."""
    return (np.arange(dst_extent, dtype=np.int64) * src_extent) // dst_extent


def resize_nearest(m: BinaryMask, w2: int, h2: int) -> BinaryMask:
    """Nearest-neighbor resample to (w2, h2); preserves binarity."""
    if w2 < 1 or h2 < 1:
        raise FormatError(f"resize target must be at least 1x1, got {w2}x{h2}")
    if w2 == m.width and h2 == m.height:
        return m
    rows = nearest_indices(m.height, h2)
    cols = nearest_indices(m.width, w2)
    return BinaryMask(m.to_array()[np.ix_(rows, cols)])


def rle_encode(m: BinaryMask) -> list[int]:
    """Run lengths over the flat row-major bits, starting with the count of
    leading zeros (possibly 0 when the first pixel is set)."""
    flat = m.bits.astype(np.uint8)
    changes = np.flatnonzero(flat[1:] != flat[:-1]) + 1
    bounds = np.concatenate(([0], changes, [flat.size]))
    runs = np.diff(bounds).tolist()
    if flat[0] == 1:
        runs.insert(0, 0)
    return [int(r) for r in runs]


def rle_decode(width: int, height: int, runs: Sequence[int]) -> BinaryMask:
    """Inverse of :func:`rle_encode`; the runs must sum to width * height."""
    counts = [int(r) for r in runs]
    if any(c < 0 for c in counts):
        raise FormatError("run lengths must be non-negative")
    total = sum(counts)
    if total != width * height:
        raise FormatError(
            f"run lengths sum to {total}, expected {width * height} for {width}x{height}"
        )
    values = np.resize(np.array([0, 1], dtype=np.uint8), len(counts))
    flat = np.repeat(values, counts)
    return BinaryMask(flat.reshape(height, width))
