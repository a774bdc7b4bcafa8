"""Video -> numbered frame images."""

from __future__ import annotations

from pathlib import Path
from typing import Optional

import cv2
from PIL import Image

from .config import AdapterError


def probe_frame_count(video_path) -> int:
    """Container-reported frame total, without decoding."""
    cap = cv2.VideoCapture(str(video_path))
    try:
        if not cap.isOpened():
            raise AdapterError(f"cannot open video: {video_path}")
        return int(cap.get(cv2.CAP_PROP_FRAME_COUNT))
    finally:
        cap.release()


def extract_frames(video_path, out_dir, fps: Optional[float] = None) -> int:
    """Decode a video into zero-padded PNG frames; returns the count.

    With ``fps`` set, frames are decimated from the container rate down to
    (approximately) the requested rate; otherwise every frame is kept.
    """
    video_path = Path(video_path)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cap = cv2.VideoCapture(str(video_path))
    if not cap.isOpened():
        raise AdapterError(f"cannot open video: {video_path}")
    try:
        native_fps = cap.get(cv2.CAP_PROP_FPS) or 0.0
        step = 1.0
        if fps is not None:
            if fps <= 0:
                raise AdapterError(f"fps must be positive, got {fps}")
            if native_fps > 0 and fps < native_fps:
                step = native_fps / fps
        written = 0
        index = 0
        next_keep = 0.0
        while True:
            ok, frame = cap.read()
            if not ok:
                break
            if index + 1e-9 >= next_keep:
                rgb = cv2.cvtColor(frame, cv2.COLOR_BGR2RGB)
                Image.fromarray(rgb, "RGB").save(out / f"{written:06d}.png")
                written += 1
                next_keep += step
            index += 1
        if index == 0:
            raise AdapterError(f"video has no decodable frames: {video_path}")
        return written
    finally:
        cap.release()
