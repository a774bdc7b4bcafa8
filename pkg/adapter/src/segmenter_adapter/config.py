from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

MODES = ("semantic", "proposals")


class AdapterError(Exception):
    """Anything that prevents the adapter from producing a manifest."""


@dataclass(frozen=True)
class AdapterConfig:
    """One segmentation run over a frame directory.

    ``model`` picks the backend: ``builtin:color`` / ``builtin:blob`` are
    self-contained deterministic segmenters (no downloads), ``hf:<id>``
    loads a pretrained model through the transformers pipelines.
    """

    model: str
    mode: str
    frames_dir: str
    out_dir: str
    device: Optional[str] = None

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise AdapterError(f"mode must be one of {MODES}, got {self.mode!r}")
