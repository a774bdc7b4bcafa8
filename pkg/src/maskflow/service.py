"""Local HTTP facade over a session so a human can pick masks in a browser.

Endpoints (all JSON unless noted):

* ``GET  /api/session``                    -> {phase, frame_count, pending}
* ``GET  /api/frames/{i}/image``           -> frame image bytes (PNG)
* ``GET  /api/frames/{i}/candidates``      -> candidate grid for frame i
* ``GET  /api/previews/{i}/{c}.png``       -> overlay preview (``?style=raw``
  for the plain black/white mask)
* ``POST /api/selection`` {frame, candidate}
* ``GET  /api/trace``                      -> current trace (partial or final)
* ``POST /api/shutdown``

Selections are idempotent: repeating an accepted POST returns the same
answer without advancing anything. Requests that do not match the current
phase get 409, out-of-range candidate indices 422. One lock serializes
every mutation; reads are safe concurrently.

Optionally serves a static directory at ``/`` so a bundled UI needs no
separate host (and no CORS setup).
"""

from __future__ import annotations

import json
import mimetypes
import re
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Optional

from .errors import MaskflowError, PhaseError, ValidationError
from .manifest import load_frame, write_frame
from .preview import render_mask_raw, render_overlay
from .session import AWAITING_INITIAL, AWAITING_RESELECTION, Session

_PREVIEW_STYLES = ("overlay", "raw")


class SessionApp:
    """Session state plus rendering caches, shared by all request threads."""

    def __init__(self, session: Session, static_dir=None) -> None:
        self.session = session
        self.lock = threading.RLock()
        self.static_dir = Path(static_dir) if static_dir else None
        self.preview_dir = session.dir / "previews"

    # -- read endpoints --------------------------------------------------

    def session_info(self) -> dict:
        with self.lock:
            return {
                "phase": self.session.phase,
                "frame_count": self.session.manifest.frame_count,
                "pending": self.session.pending_frame,
            }

    def frame_image_bytes(self, frame: int) -> bytes:
        with self.lock:
            path = self.session.manifest.frame_image_path(frame)
        return path.read_bytes()

    def candidate_grid(self, frame: int) -> dict:
        """One entry per candidate, in manifest order, with display metadata."""
        with self.lock:
            frame_record = self.session.manifest.frame(frame)
        entries = []
        for i, cand in enumerate(frame_record.candidates):
            meta = cand.meta
            entries.append(
                {
                    "index": i,
                    "preview": f"/api/previews/{frame}/{i}.png",
                    "label": meta.label,
                    "area": meta.area,
                    "predicted_iou": meta.predicted_iou,
                    "stability_score": meta.stability_score,
                }
            )
        return {"frame": frame, "count": len(entries), "candidates": entries}

    def preview_png(self, frame: int, candidate: int, style: str = "overlay") -> bytes:
        """Render (or fetch from cache) one candidate preview.

        Rendering is pure, so the cache is just a disk memo: same inputs
        always produce identical bytes.
        """
        if style not in _PREVIEW_STYLES:
            raise ValidationError(f"unknown preview style {style!r}")
        cached = self.preview_dir / f"{frame:06d}_{candidate:03d}_{style}.png"
        with self.lock:
            if not cached.is_file():
                manifest = self.session.manifest
                mask = manifest.candidate_mask(frame, candidate)
                if style == "raw":
                    raster = render_mask_raw(mask)
                else:
                    raster = render_overlay(manifest.frame_image(frame), mask, candidate)
                self.preview_dir.mkdir(parents=True, exist_ok=True)
                write_frame(raster, cached)
        return cached.read_bytes()

    def trace_payload(self) -> dict:
        with self.lock:
            return self.session.trace_dict() or {"version": 1, "frames": [], "events": []}

    # -- mutation ----------------------------------------------------------

    def post_selection(self, frame: int, candidate: int) -> tuple[int, dict]:
        """Returns (http status, body). 200 accept/replay, 409 phase, 422 index."""
        with self.lock:
            accepted = self.session.selections.get(frame)
            if accepted is not None:
                if accepted == candidate:
                    return 200, self._selection_ok()
                return 409, {
                    "error": f"frame {frame} already resolved with candidate {accepted}"
                }
            try:
                self.session.select(frame, candidate)
            except PhaseError as exc:
                return 409, {"error": str(exc)}
            except ValidationError as exc:
                return 422, {"error": str(exc)}
            return 200, self._selection_ok()

    def _selection_ok(self) -> dict:
        return {"ok": True, "phase": self.session.phase, "pending": self.session.pending_frame}


# ---------------------------------------------------------------------------
# HTTP plumbing
# ---------------------------------------------------------------------------

_ROUTES = {
    "session": re.compile(r"^/api/session$"),
    "frame_image": re.compile(r"^/api/frames/(\d+)/image$"),
    "candidates": re.compile(r"^/api/frames/(\d+)/candidates$"),
    "preview": re.compile(r"^/api/previews/(\d+)/(\d+)\.png$"),
    "trace": re.compile(r"^/api/trace$"),
    "selection": re.compile(r"^/api/selection$"),
    "shutdown": re.compile(r"^/api/shutdown$"),
}


class _Handler(BaseHTTPRequestHandler):
    server_version = "maskflow"
    app: SessionApp  # set by the server factory

    def log_message(self, fmt, *args) -> None:  # keep test output clean
        pass

    # -- helpers -----------------------------------------------------------

    def _send(self, status: int, body: bytes, content_type: str) -> None:
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)

    def _send_json(self, status: int, payload: dict) -> None:
        self._send(status, json.dumps(payload).encode("utf-8"), "application/json")

    def _path_and_query(self) -> tuple[str, dict]:
        path, _, query = self.path.partition("?")
        params = {}
        for part in query.split("&"):
            if "=" in part:
                k, _, v = part.partition("=")
                params[k] = v
        return path, params

    # -- GET ----------------------------------------------------------------

    def do_GET(self) -> None:  # noqa: N802 (stdlib naming)
        path, params = self._path_and_query()
        app = self.app
        try:
            if _ROUTES["session"].match(path):
                return self._send_json(200, app.session_info())
            if m := _ROUTES["frame_image"].match(path):
                return self._send(200, app.frame_image_bytes(int(m.group(1))), "image/png")
            if m := _ROUTES["candidates"].match(path):
                return self._send_json(200, app.candidate_grid(int(m.group(1))))
            if m := _ROUTES["preview"].match(path):
                body = app.preview_png(int(m.group(1)), int(m.group(2)),
                                       params.get("style", "overlay"))
                return self._send(200, body, "image/png")
            if _ROUTES["trace"].match(path):
                return self._send_json(200, app.trace_payload())
            if app.static_dir is not None:
                return self._send_static(path)
            return self._send_json(404, {"error": f"no such endpoint: {path}"})
        except MaskflowError as exc:
            return self._send_json(404, {"error": str(exc)})
        except FileNotFoundError as exc:
            return self._send_json(404, {"error": str(exc)})

    def _send_static(self, path: str) -> None:
        rel = path.lstrip("/") or "index.html"
        target = (self.app.static_dir / rel).resolve()
        if not str(target).startswith(str(self.app.static_dir.resolve())) or not target.is_file():
            return self._send_json(404, {"error": f"no such file: {path}"})
        ctype = mimetypes.guess_type(target.name)[0] or "application/octet-stream"
        self._send(200, target.read_bytes(), ctype)

    # -- POST ----------------------------------------------------------------

    def do_POST(self) -> None:  # noqa: N802
        path, _ = self._path_and_query()
        if _ROUTES["shutdown"].match(path):
            self._send_json(200, {"ok": True})
            threading.Thread(target=self.server.shutdown, daemon=True).start()
            return
        if not _ROUTES["selection"].match(path):
            return self._send_json(404, {"error": f"no such endpoint: {path}"})
        try:
            length = int(self.headers.get("Content-Length", "0"))
            data = json.loads(self.rfile.read(length).decode("utf-8"))
            frame = data["frame"]
            candidate = data["candidate"]
            if not isinstance(frame, int) or not isinstance(candidate, int):
                raise TypeError
        except (json.JSONDecodeError, KeyError, TypeError, ValueError):
            return self._send_json(400, {"error": "body must be {\"frame\": int, \"candidate\": int}"})
        status, body = self.app.post_selection(frame, candidate)
        self._send_json(status, body)


def build_server(session: Session, port: int = 0, static_dir=None) -> ThreadingHTTPServer:
    """Create (but do not start) the HTTP server; port 0 picks a free one."""
    app = SessionApp(session, static_dir=static_dir)
    handler = type("BoundHandler", (_Handler,), {"app": app})
    server = ThreadingHTTPServer(("127.0.0.1", port), handler)
    return server


def serve_session(session: Session, port: int, static_dir=None) -> None:
    """Blocking server loop; returns after POST /api/shutdown."""
    server = build_server(session, port=port, static_dir=static_dir)
    host, bound_port = server.server_address[:2]
    # flush so wrappers watching a pipe see the bound port immediately
    print(f"serving session {session.dir} at http://{host}:{bound_port}/", flush=True)
    try:
        server.serve_forever()
    finally:
        server.server_close()


def serve(session_dir, port: int = 8765, static_dir=None) -> None:
    """Serve an existing session directory until shutdown."""
    serve_session(Session.load(session_dir), port=port, static_dir=static_dir)
