"""segmenter_adapter: run a segmentation backend over extracted video
frames and emit the version-1 candidate manifest the tracking engine
consumes. Strict producer role: no tracking, no compositing.
"""

from .config import AdapterConfig, AdapterError
from .frames import extract_frames
from .pipeline import segment_frames

__version__ = "0.1.0"

__all__ = ["AdapterConfig", "AdapterError", "extract_frames", "segment_frames"]
