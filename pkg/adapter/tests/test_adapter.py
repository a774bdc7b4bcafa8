import json

import cv2
import numpy as np
import pytest
from PIL import Image

from segmenter_adapter import AdapterConfig, AdapterError, extract_frames, segment_frames
from segmenter_adapter.cli import main as cli_main
from segmenter_adapter.frames import probe_frame_count
from segmenter_adapter.models import COLOR_TABLE, load_model, nearest_color_name

# the primary engine is the schema oracle: adapter output must parse and
# validate there, including area == mask popcount and bbox == tight bbox
maskflow = pytest.importorskip("maskflow")


def elephant_scene(width=64, height=48, blob_x=20):
    """Sky over a road, with a gray elephant-toned blob on the road."""
    rgb = np.zeros((height, width, 3), dtype=np.uint8)
    rgb[: height // 2] = COLOR_TABLE["sky"]
    rgb[height // 2:] = COLOR_TABLE["road"]
    rgb[28:40, blob_x:blob_x + 14] = COLOR_TABLE["elephant"]
    return rgb


@pytest.fixture
def scene_frames(tmp_path):
    frames = tmp_path / "frames"
    frames.mkdir()
    for t in range(3):
        Image.fromarray(elephant_scene(blob_x=20 + 2 * t), "RGB").save(frames / f"{t:06d}.png")
    return frames


# ---------------------------------------------------------------------------
# frame extraction
# ---------------------------------------------------------------------------

def write_video(path, n_frames, fps=10.0, size=(32, 24)):
    writer = cv2.VideoWriter(str(path), cv2.VideoWriter_fourcc(*"MJPG"), fps, size)
    assert writer.isOpened()
    for i in range(n_frames):
        writer.write(np.full((size[1], size[0], 3), (i * 23) % 255, dtype=np.uint8))
    writer.release()
    return path


def test_extract_all_frames(tmp_path):
    video = write_video(tmp_path / "clip.avi", 10)
    out = tmp_path / "frames"
    assert extract_frames(video, out) == 10
    names = sorted(p.name for p in out.glob("*.png"))
    assert names == [f"{i:06d}.png" for i in range(10)]


def test_extract_count_matches_container_probe(tmp_path):
    video = write_video(tmp_path / "clip.avi", 17)
    assert probe_frame_count(video) == 17
    assert extract_frames(video, tmp_path / "frames") == 17


def test_extract_single_frame_video(tmp_path):
    video = write_video(tmp_path / "still.avi", 1)
    assert extract_frames(video, tmp_path / "frames") == 1


def test_extract_fps_decimation(tmp_path):
    video = write_video(tmp_path / "clip.avi", 10, fps=10.0)
    assert extract_frames(video, tmp_path / "frames", fps=5.0) == 5


def test_extract_unreadable_input(tmp_path):
    bad = tmp_path / "noise.avi"
    bad.write_bytes(b"not a video")
    with pytest.raises(AdapterError):
        extract_frames(bad, tmp_path / "frames")


# ---------------------------------------------------------------------------
# builtin semantic mode
# ---------------------------------------------------------------------------

def test_semantic_labels_on_elephant_scene(scene_frames, tmp_path):
    out = tmp_path / "clip"
    config = AdapterConfig(model="builtin:color", mode="semantic",
                           frames_dir=str(scene_frames), out_dir=str(out))
    manifest_path = segment_frames(config)
    manifest = maskflow.parse_manifest(manifest_path)  # full schema validation
    labels = {c.meta.label for c in manifest.frames[0].candidates}
    assert "elephant" in labels
    assert "road" in labels
    assert "sky" in labels
    assert manifest.frame_count == 3


def test_semantic_output_validates_against_primary_schema(scene_frames, tmp_path):
    out = tmp_path / "clip"
    segment_frames(AdapterConfig(model="builtin:color", mode="semantic",
                                 frames_dir=str(scene_frames), out_dir=str(out)))
    manifest = maskflow.parse_manifest(out / "manifest.json")
    for i in range(manifest.frame_count):
        for cand, mask in zip(manifest.frames[i].candidates, manifest.candidate_masks(i)):
            assert cand.meta.area == maskflow.area(mask)
            assert cand.meta.bbox == maskflow.tight_bbox(mask)


def test_nearest_color_name_exact_hits():
    for name, color in COLOR_TABLE.items():
        assert nearest_color_name(color) == name


# ---------------------------------------------------------------------------
# builtin proposals mode
# ---------------------------------------------------------------------------

def test_proposals_emit_sam_style_metadata(scene_frames, tmp_path):
    out = tmp_path / "clip"
    segment_frames(AdapterConfig(model="builtin:blob", mode="proposals",
                                 frames_dir=str(scene_frames), out_dir=str(out)))
    manifest = maskflow.parse_manifest(out / "manifest.json")
    frame = manifest.frames[0]
    assert len(frame.candidates) >= 3
    for cand, mask in zip(frame.candidates, manifest.candidate_masks(0)):
        assert maskflow.area(mask) > 0          # proposals are never empty
        assert cand.meta.label is None          # no names, scores instead
        assert cand.meta.area is not None
        assert cand.meta.bbox is not None
        assert 0.0 <= cand.meta.predicted_iou <= 1.0
        assert 0.0 <= cand.meta.stability_score <= 1.0
        assert len(cand.meta.point_coords) == 1
        assert cand.meta.crop_box.to_list() == [0, 0, 64, 48]


def test_proposals_ordered_largest_first(scene_frames, tmp_path):
    out = tmp_path / "clip"
    segment_frames(AdapterConfig(model="builtin:blob", mode="proposals",
                                 frames_dir=str(scene_frames), out_dir=str(out)))
    manifest = maskflow.parse_manifest(out / "manifest.json")
    areas = [c.meta.area for c in manifest.frames[0].candidates]
    assert areas == sorted(areas, reverse=True)


# ---------------------------------------------------------------------------
# determinism and error handling
# ---------------------------------------------------------------------------

def test_rerun_is_byte_identical(scene_frames, tmp_path):
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        segment_frames(AdapterConfig(model="builtin:blob", mode="proposals",
                                     frames_dir=str(scene_frames), out_dir=str(out)))
        outs.append(out)
    a, b = outs
    assert (a / "manifest.json").read_bytes() == (b / "manifest.json").read_bytes()
    for mask in sorted((a / "masks").glob("*.png")):
        assert mask.read_bytes() == (b / "masks" / mask.name).read_bytes()


def test_mode_capability_mismatch():
    with pytest.raises(AdapterError, match="supports mode"):
        load_model("builtin:color", "proposals")
    with pytest.raises(AdapterError, match="supports mode"):
        load_model("builtin:blob", "semantic")


def test_unknown_model_rejected():
    with pytest.raises(AdapterError, match="unknown model"):
        load_model("mystery", "semantic")


def test_inference_failure_logged_and_frame_kept(scene_frames, tmp_path, monkeypatch):
    from segmenter_adapter import pipeline as pipeline_mod

    class FlakyModel:
        mode = "semantic"

        def __init__(self):
            self.calls = 0

        def segment(self, rgb):
            self.calls += 1
            if self.calls == 2:
                raise RuntimeError("backend hiccup")
            return load_model("builtin:color", "semantic").segment(rgb)

    monkeypatch.setattr(pipeline_mod, "load_model", lambda *a, **k: FlakyModel())
    out = tmp_path / "clip"
    segment_frames(AdapterConfig(model="builtin:color", mode="semantic",
                                 frames_dir=str(scene_frames), out_dir=str(out)))
    manifest = maskflow.parse_manifest(out / "manifest.json")
    assert manifest.frames[1].candidates == ()  # failed frame kept, empty
    assert len(manifest.frames[0].candidates) > 0
    log = json.loads((out / "adapter_log.json").read_text())
    assert log["errors"] == [{"frame": 1, "error": "backend hiccup"}]


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------

def test_cli_segment_and_extract(tmp_path, scene_frames, capsys):
    out = tmp_path / "clip"
    code = cli_main(["segment", "--model", "builtin:color", "--mode", "semantic",
                     "--frames", str(scene_frames), "--out", str(out)])
    assert code == 0
    assert (out / "manifest.json").is_file()

    video = write_video(tmp_path / "clip.avi", 6)
    code = cli_main(["extract-frames", str(video), "--out", str(tmp_path / "vframes")])
    assert code == 0
    assert "6 frames" in capsys.readouterr().out


def test_cli_bad_model_exit_code(scene_frames, tmp_path, capsys):
    code = cli_main(["segment", "--model", "nope", "--mode", "semantic",
                     "--frames", str(scene_frames), "--out", str(tmp_path / "x")])
    assert code == 2
    assert "unknown model" in capsys.readouterr().err
