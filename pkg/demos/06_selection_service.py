"""Scripted walk through the selection service.

The service wraps a run session in a small HTTP API so a browser (or this
script) can make the two human decisions: the initial mask for frame 0
and any re-selection after a scene cut. Everything the UI shows comes
from these endpoints; the UI itself does no mask math.
"""

import json
import tempfile
import threading
from pathlib import Path

import requests

from maskflow import RunConfig, Session, TrackingPolicy
from maskflow.service import build_server
from maskflow.synthetic import scene_cut_fixture, write_background_dir

root = Path(tempfile.mkdtemp(prefix="maskflow_service_"))
fixture = scene_cut_fixture(root / "fg", n_frames=8, cut=5)
bg = write_background_dir(root / "bg", 8, 64, 64)

session = Session.create(RunConfig(
    manifest=str(fixture.manifest_path),
    background=str(bg),
    out=str(root / "session"),
    policy=TrackingPolicy.adaptive(tau=0.5),
    on_reselect="serve",
))
session.advance()

server = build_server(session, port=0)
base = f"http://127.0.0.1:{server.server_address[1]}"
threading.Thread(target=server.serve_forever, daemon=True).start()
print(f"service at {base}")


def get(path):
    body = requests.get(base + path).json()
    print(f"GET  {path:<28} -> {json.dumps(body)[:100]}")
    return body


def post(path, payload):
    r = requests.post(base + path, json=payload)
    print(f"POST {path:<28} {payload} -> {r.status_code} {json.dumps(r.json())[:80]}")
    return r


get("/api/session")                      # fresh: waiting for the frame-0 pick
get("/api/frames/0/candidates")          # what the operator sees as a grid
post("/api/selection", {"frame": 0, "candidate": 0})
get("/api/session")                      # tracking hit the scene cut at frame 5
get("/api/frames/5/candidates")          # the new scene's candidates
post("/api/selection", {"frame": 5, "candidate": 1})
trace = get("/api/trace")

print()
print("events:", trace["events"])
print("outputs:", sorted(p.name for p in (session.dir / "outputs").glob("*.png"))[:3], "...")

post("/api/shutdown", {})
server.server_close()
