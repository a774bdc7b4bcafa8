import contextlib
import io
import json
import threading

import numpy as np
import pytest
import requests
from PIL import Image

from maskflow import (
    BinaryMask,
    Candidate,
    CandidateMeta,
    DimensionMismatch,
    FrameCandidates,
    Manifest,
    RunConfig,
    Session,
    TrackingPolicy,
    blend_mask,
    render_overlay,
    write_frame,
    write_manifest,
    write_mask_image,
)
from maskflow.preview import palette_color, render_mask_raw
from maskflow.service import build_server
from maskflow.synthetic import (
    scene_cut_fixture,
    solid_frame,
    square_mask,
    write_background_dir,
)


# ---------------------------------------------------------------------------
# overlay rendering math
# ---------------------------------------------------------------------------

def test_blend_empty_mask_is_identity():
    frame = solid_frame(6, 4, (10, 200, 30))
    empty = BinaryMask(np.zeros((4, 6), dtype=bool))
    assert np.array_equal(blend_mask(frame, empty, (255, 0, 0)), frame)


def test_blend_full_mask_half_mix_rounds_up():
    frame = solid_frame(4, 4, (0, 0, 0))
    full = BinaryMask(np.ones((4, 4), dtype=bool))
    out = blend_mask(frame, full, (255, 0, 0))
    assert np.all(out == np.array([128, 0, 0], dtype=np.uint8))


def test_blend_outside_pixels_untouched():
    frame = solid_frame(8, 8, (40, 50, 60))
    mask = square_mask(8, 8, 2, 2, 3)
    out = blend_mask(frame, mask, (0, 255, 0))
    inside = mask.to_array()
    assert np.array_equal(out[~inside], frame[~inside])
    expected_inside = tuple((np.array((40, 50, 60)) + np.array((0, 255, 0)) + 1) // 2)
    assert all(tuple(px) == expected_inside for px in out[inside])


def test_blend_dim_mismatch():
    with pytest.raises(DimensionMismatch):
        blend_mask(solid_frame(4, 4, (0, 0, 0)), square_mask(8, 8, 0, 0, 2), (1, 2, 3))


def test_render_overlay_cycles_palette():
    frame = solid_frame(4, 4, (0, 0, 0))
    full = BinaryMask(np.ones((4, 4), dtype=bool))
    assert np.array_equal(render_overlay(frame, full, 0), render_overlay(frame, full, 12))
    assert palette_color(3) == palette_color(15)


def test_render_overlay_deterministic():
    frame = solid_frame(16, 16, (9, 9, 9))
    mask = square_mask(16, 16, 4, 4, 5)
    a = render_overlay(frame, mask, 2)
    b = render_overlay(frame, mask, 2)
    assert np.array_equal(a, b)


def test_render_mask_raw_black_and_white():
    out = render_mask_raw(square_mask(4, 2, 0, 0, 2))
    assert out.shape == (2, 4, 3)
    assert set(map(tuple, out.reshape(-1, 3))) == {(0, 0, 0), (255, 255, 255)}


# ---------------------------------------------------------------------------
# HTTP walkthrough
# ---------------------------------------------------------------------------

@contextlib.contextmanager
def served(session):
    server = build_server(session, port=0)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:
        yield f"http://127.0.0.1:{server.server_address[1]}"
    finally:
        server.shutdown()
        server.server_close()
        thread.join(timeout=5)


@pytest.fixture
def fresh_session(tmp_path):
    fixture = scene_cut_fixture(tmp_path / "fg", n_frames=8, cut=5)
    bg = write_background_dir(tmp_path / "bg", 8, 64, 64)
    config = RunConfig(
        manifest=str(fixture.manifest_path),
        background=str(bg),
        out=str(tmp_path / "session"),
        policy=TrackingPolicy.adaptive(tau=0.5),
        on_reselect="serve",
    )
    session = Session.create(config)
    session.advance()
    return session, fixture


def test_full_walkthrough(fresh_session):
    session, fixture = fresh_session
    with served(session) as base:
        info = requests.get(f"{base}/api/session").json()
        assert info == {"phase": "awaiting_initial_selection", "frame_count": 8, "pending": 0}

        r = requests.post(f"{base}/api/selection", json={"frame": 0, "candidate": 0})
        assert r.status_code == 200
        assert r.json()["phase"] == "awaiting_reselection"
        assert r.json()["pending"] == 5

        r = requests.post(f"{base}/api/selection", json={"frame": 5, "candidate": 1})
        assert r.status_code == 200
        assert r.json()["phase"] == "done"

        trace = requests.get(f"{base}/api/trace").json()
        assert trace["events"] == [{"frame": 5, "kind": "reselected"}]
        assert [f["chosen_index"] for f in trace["frames"]] == list(fixture.gt_indices)

    assert (session.dir / "outputs" / "000007.png").is_file()


def test_trace_endpoint_serves_partial_while_pending(fresh_session):
    session, _ = fresh_session
    with served(session) as base:
        requests.post(f"{base}/api/selection", json={"frame": 0, "candidate": 0})
        trace = requests.get(f"{base}/api/trace").json()
        # blocked at frame 5: the five completed frames are already visible
        assert len(trace["frames"]) == 5
        assert trace["events"] == []


def test_posts_are_idempotent(fresh_session):
    session, _ = fresh_session
    with served(session) as base:
        first = requests.post(f"{base}/api/selection", json={"frame": 0, "candidate": 0})
        again = requests.post(f"{base}/api/selection", json={"frame": 0, "candidate": 0})
        assert first.status_code == again.status_code == 200
        assert first.json() == again.json()
        # a different candidate for an already-resolved frame is a conflict
        conflict = requests.post(f"{base}/api/selection", json={"frame": 0, "candidate": 2})
        assert conflict.status_code == 409


def test_phase_violations_are_409_and_leave_state(fresh_session):
    session, _ = fresh_session
    with served(session) as base:
        before = (session.dir / "session.json").read_bytes()
        r = requests.post(f"{base}/api/selection", json={"frame": 3, "candidate": 0})
        assert r.status_code == 409
        assert (session.dir / "session.json").read_bytes() == before
        info = requests.get(f"{base}/api/session").json()
        assert info["phase"] == "awaiting_initial_selection"


def test_invalid_candidate_is_422(fresh_session):
    session, _ = fresh_session
    with served(session) as base:
        before = (session.dir / "session.json").read_bytes()
        r = requests.post(f"{base}/api/selection", json={"frame": 0, "candidate": 99})
        assert r.status_code == 422
        assert "out of range" in r.json()["error"]
        assert (session.dir / "session.json").read_bytes() == before


def test_malformed_body_is_400(fresh_session):
    session, _ = fresh_session
    with served(session) as base:
        r = requests.post(f"{base}/api/selection", data="noise",
                          headers={"Content-Type": "application/json"})
        assert r.status_code == 400
        r = requests.post(f"{base}/api/selection", json={"frame": "0", "candidate": 1})
        assert r.status_code == 400


def test_candidate_grid_order_and_meta(fresh_session):
    session, _ = fresh_session
    with served(session) as base:
        grid = requests.get(f"{base}/api/frames/0/candidates").json()
        assert grid["frame"] == 0
        assert grid["count"] == 3
        assert [c["index"] for c in grid["candidates"]] == [0, 1, 2]
        for c in grid["candidates"]:
            assert c["preview"] == f"/api/previews/0/{c['index']}.png"
            assert c["area"] is not None
            assert c["label"] is None


def test_frame_image_endpoint_serves_file_bytes(fresh_session):
    session, fixture = fresh_session
    with served(session) as base:
        body = requests.get(f"{base}/api/frames/2/image").content
        on_disk = (fixture.manifest_path.parent / "frames/000002.png").read_bytes()
        assert body == on_disk


def test_preview_rendering_and_cache(fresh_session):
    session, fixture = fresh_session
    with served(session) as base:
        a = requests.get(f"{base}/api/previews/0/1.png").content
        b = requests.get(f"{base}/api/previews/0/1.png").content
        assert a == b
        img = np.asarray(Image.open(io.BytesIO(a)))
        manifest = session.manifest
        expected = render_overlay(manifest.frame_image(0), manifest.candidate_mask(0, 1), 1)
        assert np.array_equal(img, expected)
        raw = requests.get(f"{base}/api/previews/0/1.png?style=raw").content
        raw_img = np.asarray(Image.open(io.BytesIO(raw)))
        assert np.array_equal(raw_img, render_mask_raw(manifest.candidate_mask(0, 1)))


def test_unknown_endpoint_and_bad_frame_are_404(fresh_session):
    session, _ = fresh_session
    with served(session) as base:
        assert requests.get(f"{base}/api/nothing").status_code == 404
        assert requests.get(f"{base}/api/frames/99/candidates").status_code == 404


def test_shutdown_endpoint_stops_server(fresh_session):
    session, _ = fresh_session
    server = build_server(session, port=0)
    base = f"http://127.0.0.1:{server.server_address[1]}"
    done = threading.Event()

    def run():
        server.serve_forever()
        done.set()

    threading.Thread(target=run, daemon=True).start()
    assert requests.post(f"{base}/api/shutdown").status_code == 200
    assert done.wait(timeout=5)
    server.server_close()


# ---------------------------------------------------------------------------
# SAM-style metadata surfaces without labels
# ---------------------------------------------------------------------------

def test_grid_exposes_scores_for_unlabeled_proposals(tmp_path):
    root = tmp_path / "fg"
    (root / "frames").mkdir(parents=True)
    (root / "masks").mkdir()
    mask = square_mask(8, 8, 1, 1, 4)
    write_frame(solid_frame(8, 8, (5, 5, 5)), root / "frames/000000.png")
    write_mask_image(mask, root / "masks/m.png")
    meta = CandidateMeta(area=16, predicted_iou=0.875, stability_score=0.5)
    manifest = Manifest(
        width=8, height=8,
        frames=[FrameCandidates(0, "frames/000000.png",
                                (Candidate(mask_path="masks/m.png", meta=meta),))],
        root=root,
    )
    write_manifest(manifest, root / "manifest.json")
    bg = write_background_dir(tmp_path / "bg", 1, 8, 8)
    config = RunConfig(
        manifest=str(root / "manifest.json"),
        background=str(bg),
        out=str(tmp_path / "session"),
        policy=TrackingPolicy.first_frame(),
        on_reselect="serve",
    )
    session = Session.create(config)
    session.advance()
    with served(session) as base:
        grid = requests.get(f"{base}/api/frames/0/candidates").json()
        entry = grid["candidates"][0]
        assert entry["label"] is None
        assert entry["predicted_iou"] == 0.875
        assert entry["stability_score"] == 0.5


def test_grid_for_candidate_free_frame_is_empty(tmp_path):
    root = tmp_path / "fg"
    (root / "frames").mkdir(parents=True)
    (root / "masks").mkdir()
    mask = square_mask(8, 8, 1, 1, 4)
    write_frame(solid_frame(8, 8, (5, 5, 5)), root / "frames/000000.png")
    write_frame(solid_frame(8, 8, (6, 6, 6)), root / "frames/000001.png")
    write_mask_image(mask, root / "masks/m.png")
    manifest = Manifest(
        width=8, height=8,
        frames=[
            FrameCandidates(0, "frames/000000.png", (Candidate(mask_path="masks/m.png"),)),
            FrameCandidates(1, "frames/000001.png", ()),
        ],
        root=root,
    )
    write_manifest(manifest, root / "manifest.json")
    bg = write_background_dir(tmp_path / "bg", 2, 8, 8)
    config = RunConfig(
        manifest=str(root / "manifest.json"),
        background=str(bg),
        out=str(tmp_path / "session"),
        policy=TrackingPolicy.first_frame(),
        on_reselect="serve",
    )
    session = Session.create(config)
    session.advance()
    with served(session) as base:
        grid = requests.get(f"{base}/api/frames/1/candidates").json()
        assert grid == {"frame": 1, "count": 0, "candidates": []}
