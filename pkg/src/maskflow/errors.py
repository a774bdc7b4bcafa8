"""Exception types shared across the package.

The CLI maps these onto its exit-code contract: validation-class errors
exit 2, a pending re-selection exits 3, and OS-level I/O failures exit 4.
"""

from __future__ import annotations


class MaskflowError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(MaskflowError):
    """Two rasters or masks that must share dimensions do not."""


class FormatError(MaskflowError):
    """A file or byte-level structure is malformed (JSON, image, RLE)."""


class ValidationError(MaskflowError):
    """Inputs are structurally readable but violate a semantic invariant."""


class MissingAsset(ValidationError):
    """A manifest references a file that does not exist."""

    def __init__(self, path) -> None:
        super().__init__(f"missing asset: {path}")
        self.path = str(path)


class ReselectionRequired(MaskflowError):
    """Tracking cannot proceed without a human choice for one frame.

    ``partial`` carries the trace accumulated up to (not including) the
    blocked frame so a session can persist and later resume.
    """

    def __init__(self, frame: int, partial=None) -> None:
        super().__init__(f"re-selection required at frame {frame}")
        self.frame = frame
        self.partial = partial


class PhaseError(ValidationError):
    """An operation was attempted in a session phase that forbids it."""
