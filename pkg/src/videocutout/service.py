"""Local HTTP bridge between the engine and the browser UI.

JSON endpoints under ``/api/v1/`` drive the session lifecycle (create,
recommend, annotate, propagate, inspect); image payloads are PNG. The
built UI bundle, when present, is served at ``/``. Sessions live in
memory; an optional snapshot writes masks + config to disk so a session
can be recreated later.
"""
from __future__ import annotations

import json
import threading
import uuid
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

import numpy as np

from .config import RunConfig
from .data import AnnotationSet, Mask
from .io import (
    decode_mask_png,
    encode_frame_png,
    encode_mask_png,
    load_dataset_sequence,
    load_sequence,
)
from .metrics import contour_accuracy, region_similarity
from .pipeline import CutoutSession


class ApiError(Exception):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status


class Session:
    """One annotation session; mutations serialize on the session lock."""

    def __init__(self, sid: str, sequence, config: RunConfig, source: str,
                 ground_truth: dict, k: int):
        self.id = sid
        self.sequence = sequence
        self.config = config
        self.source = source
        self.ground_truth = ground_truth
        self.k = k
        self.state = "created"
        self.lock = threading.RLock()
        self.annotations: dict = {}       # frame index -> (Mask, original PNG bytes)
        self.recommendations = None
        self.results: dict = {}           # frame index -> labels array
        self.progress_frames: dict = {}   # frame index -> fraction done
        self.progress = 0.0
        self.job = None
        self.error = None
        self._engine = CutoutSession(sequence, config)

    def summary(self) -> dict:
        return {
            "session_id": self.id,
            "state": self.state,
            "frames": self.sequence.n_frames,
            "width": self.sequence.width,
            "height": self.sequence.height,
            "k": self.k,
            "annotated": sorted(self.annotations),
            "has_ground_truth": bool(self.ground_truth),
        }


class AnnotationService:
    """Routing and session registry, independent of the socket layer."""

    def __init__(self, config: RunConfig | None = None, ui_dir=None):
        self.config = (config or RunConfig()).validate()
        self.ui_dir = Path(ui_dir) if ui_dir else None
        self.sessions: dict = {}
        self.lock = threading.Lock()

    # -- dispatch ----------------------------------------------------------

    def dispatch(self, method: str, path: str, body: bytes):
        """Returns (status, content_type, payload_bytes)."""
        try:
            return self._route(method, path, body)
        except ApiError as exc:
            return exc.status, "application/json", json.dumps({"error": str(exc)}).encode()
        except Exception as exc:  # defensive: surface internal errors as JSON
            return 500, "application/json", json.dumps({"error": str(exc)}).encode()

    def _route(self, method, path, body):
        parts = [p for p in path.split("?")[0].split("/") if p]
        if not parts or parts[0] != "api":
            return self._static(parts)
        if len(parts) < 3 or parts[1] != "v1" or parts[2] != "sessions":
            raise ApiError(404, "unknown endpoint")
        rest = parts[3:]
        if not rest:
            if method == "POST":
                return self._create_session(body)
            raise ApiError(404, "unknown endpoint")
        session = self._session(rest[0])
        tail = rest[1:]
        if not tail:
            if method == "GET":
                return _json(200, session.summary())
            raise ApiError(404, "unknown endpoint")
        head = tail[0]
        if head == "recommendations" and method == "GET":
            return self._recommendations(session)
        if head == "frames" and len(tail) == 2 and method == "GET":
            return self._frame(session, tail[1])
        if head == "annotations":
            if method == "GET" and len(tail) == 1:
                return _json(200, {"frames": sorted(session.annotations)})
            if len(tail) == 2:
                if method == "PUT":
                    return self._put_annotation(session, tail[1], body)
                if method == "GET":
                    return self._get_annotation(session, tail[1])
        if head == "propagate" and method == "POST":
            return self._start_propagation(session, body)
        if head == "status" and method == "GET":
            return self._status(session)
        if head == "results" and len(tail) == 3 and method == "GET":
            return self._result(session, tail[1], tail[2])
        if head == "metrics" and method == "GET":
            return self._metrics(session)
        if head == "snapshot" and method == "POST":
            return self._snapshot(session, body)
        raise ApiError(404, "unknown endpoint")

    # -- endpoint implementations -------------------------------------------

    def _create_session(self, body):
        payload = _parse_json(body)
        if "snapshot" in payload:
            return self._restore_session(payload["snapshot"])
        source = payload.get("sequence")
        if not source:
            raise ApiError(400, "body must name a sequence directory")
        src = Path(source)
        try:
            if (src / "frames").is_dir():
                sequence, gt = load_dataset_sequence(src)
            else:
                sequence, gt = load_sequence(src), {}
        except (FileNotFoundError, ValueError) as exc:
            raise ApiError(400, f"cannot load sequence: {exc}")
        k = int(payload.get("k", self.config.annotation_budget))
        overrides = payload.get("config", {})
        if "window_sizes" in overrides:
            overrides["window_sizes"] = tuple(overrides["window_sizes"])
        try:
            config = RunConfig(**{**self.config.__dict__, **overrides}).validate()
        except (TypeError, ValueError) as exc:
            raise ApiError(400, f"bad config override: {exc}")
        sid = uuid.uuid4().hex[:12]
        session = Session(sid, sequence, config, str(source), gt, k)
        with self.lock:
            self.sessions[sid] = session
        return _json(201, session.summary())

    def _session(self, sid) -> Session:
        with self.lock:
            session = self.sessions.get(sid)
        if session is None:
            raise ApiError(404, f"unknown session {sid}")
        return session

    def _recommendations(self, session):
        with session.lock:
            if session.recommendations is None:
                session.recommendations = session._engine.recommend(session.k)
                if session.state == "created":
                    session.state = "recommended"
            return _json(200, {"frames": session.recommendations})

    def _frame_index(self, session, raw) -> int:
        try:
            idx = int(raw)
        except ValueError:
            raise ApiError(404, f"bad frame index {raw!r}")
        if not 1 <= idx <= session.sequence.n_frames:
            raise ApiError(404, f"frame {idx} outside 1..{session.sequence.n_frames}")
        return idx

    def _frame(self, session, raw):
        idx = self._frame_index(session, raw)
        return 200, "image/png", encode_frame_png(session.sequence.frame(idx))

    def _put_annotation(self, session, raw, body):
        idx = self._frame_index(session, raw)
        try:
            mask = decode_mask_png(body, idx)
        except Exception as exc:
            raise ApiError(400, f"malformed mask: {exc}")
        if mask.labels.shape != (session.sequence.height, session.sequence.width):
            raise ApiError(400, "mask dimensions do not match the sequence")
        with session.lock:
            if session.state == "propagating":
                raise ApiError(409, "propagation is running")
            session.annotations[idx] = (mask, bytes(body))
            session.state = "annotating"
        return _json(200, {"ok": True, "frame": idx})

    def _get_annotation(self, session, raw):
        idx = self._frame_index(session, raw)
        with session.lock:
            entry = session.annotations.get(idx)
        if entry is None:
            raise ApiError(404, f"no annotation for frame {idx}")
        return 200, "image/png", entry[1]

    def _start_propagation(self, session, body):
        payload = _parse_json(body) if body else {}
        forward_only = bool(payload.get("forward_only", False))
        with session.lock:
            if session.state == "propagating":
                raise ApiError(409, "propagation already running")
            if not session.annotations:
                raise ApiError(400, "no annotations submitted")
            session.state = "propagating"
            session.error = None
            session.progress = 0.0
            session.progress_frames = {}
            ann = AnnotationSet(tuple(
                (idx, mask) for idx, (mask, _) in sorted(session.annotations.items())))
            job_id = uuid.uuid4().hex[:8]
            session.job = job_id
        thread = threading.Thread(target=self._run_propagation,
                                  args=(session, ann, forward_only), daemon=True)
        thread.start()
        return _json(202, {"job": job_id})

    def _run_propagation(self, session, annotations, forward_only):
        indices = annotations.frame_indices
        first, last = indices[0], indices[-1]
        needed = {}
        for t in range(1, session.sequence.n_frames + 1):
            if t in indices:
                needed[t] = 0
            else:
                both = (not forward_only) and first < t < last
                needed[t] = 2 if both else 1

        def cb(done, total, frame, phase):
            with session.lock:
                session.progress = done / total
                if needed.get(frame):
                    session.progress_frames[frame] = min(
                        1.0, session.progress_frames.get(frame, 0.0) + 1.0 / needed[frame])

        try:
            # the session engine caches per-frame superpixel maps, so
            # re-propagation after re-annotation skips the oversegmentation
            session._engine.set_annotations(annotations)
            masks = session._engine.propagate(forward_only=forward_only, progress_cb=cb)
            with session.lock:
                session.results = {m.frame_index: m.labels for m in masks}
                session.progress = 1.0
                for t in session.results:
                    session.progress_frames[t] = 1.0
                session.state = "done"
        except Exception as exc:
            with session.lock:
                session.error = str(exc)
                session.state = "error"

    def _status(self, session):
        with session.lock:
            return _json(200, {
                "state": session.state,
                "progress": session.progress,
                "frames": {str(t): round(f, 4)
                           for t, f in sorted(session.progress_frames.items())},
                "error": session.error,
            })

    def _result(self, session, raw, kind):
        idx = self._frame_index(session, raw)
        with session.lock:
            labels = session.results.get(idx)
        if labels is None:
            raise ApiError(404, f"no result for frame {idx}")
        if kind == "mask":
            return 200, "image/png", encode_mask_png(labels)
        if kind == "overlay":
            frame = session.sequence.frame(idx).copy()
            fg = labels.astype(bool)
            frame[fg] = frame[fg] // 2 + np.array([0, 127, 0], dtype=np.uint8)
            return 200, "image/png", encode_frame_png(frame)
        raise ApiError(404, f"unknown result kind {kind!r}")

    def _metrics(self, session):
        if not session.ground_truth:
            raise ApiError(404, "sequence has no ground-truth masks")
        with session.lock:
            results = dict(session.results)
        if not results:
            raise ApiError(404, "no results yet")
        per_frame = {}
        js, fs = [], []
        tol = session.config.contour_tolerance_px(session.sequence.width,
                                                  session.sequence.height)
        for t, labels in sorted(results.items()):
            gt = session.ground_truth.get(t)
            if gt is None:
                continue
            j = region_similarity(labels, gt.labels)
            f = contour_accuracy(labels, gt.labels, tol)
            per_frame[str(t)] = {"j": round(j, 6), "f": round(f, 6)}
            js.append(j)
            fs.append(f)
        return _json(200, {
            "per_frame": per_frame,
            "mean_j": float(np.mean(js)) if js else None,
            "mean_f": float(np.mean(fs)) if fs else None,
        })

    def _snapshot(self, session, body):
        payload = _parse_json(body)
        target = payload.get("path")
        if not target:
            raise ApiError(400, "body must name a snapshot path")
        target = Path(target)
        target.mkdir(parents=True, exist_ok=True)
        with session.lock:
            session.config.to_file(target / "config.txt")
            meta = {
                "sequence": session.source,
                "k": session.k,
                "state": session.state,
                "annotations": sorted(session.annotations),
            }
            (target / "session.json").write_text(json.dumps(meta, indent=2))
            ann_dir = target / "annotations"
            ann_dir.mkdir(exist_ok=True)
            for idx, (_, png) in session.annotations.items():
                (ann_dir / f"{idx:05d}.png").write_bytes(png)
            res_dir = target / "results"
            res_dir.mkdir(exist_ok=True)
            for idx, labels in session.results.items():
                (res_dir / f"{idx:05d}.png").write_bytes(encode_mask_png(labels))
        return _json(200, {"ok": True, "path": str(target)})

    def _restore_session(self, snapshot):
        snap = Path(snapshot)
        meta_path = snap / "session.json"
        if not meta_path.is_file():
            raise ApiError(400, f"no snapshot at {snap}")
        meta = json.loads(meta_path.read_text())
        config = RunConfig.from_file(snap / "config.txt") if (snap / "config.txt").is_file() \
            else self.config
        status, ctype, payload = self._create_session(json.dumps({
            "sequence": meta["sequence"], "k": meta.get("k", 1)}).encode())
        if status != 201:
            return status, ctype, payload
        summary = json.loads(payload)
        session = self._session(summary["session_id"])
        session.config = config
        ann_dir = snap / "annotations"
        if ann_dir.is_dir():
            for p in sorted(ann_dir.glob("*.png")):
                idx = int(p.stem)
                png = p.read_bytes()
                session.annotations[idx] = (decode_mask_png(png, idx), png)
            if session.annotations:
                session.state = "annotating"
        res_dir = snap / "results"
        if res_dir.is_dir():
            for p in sorted(res_dir.glob("*.png")):
                idx = int(p.stem)
                session.results[idx] = decode_mask_png(p.read_bytes(), idx).labels
            if session.results:
                session.state = "done"
        return _json(201, session.summary())

    # -- static files --------------------------------------------------------

    def _static(self, parts):
        if self.ui_dir is None or not self.ui_dir.is_dir():
            if not parts:
                return (200, "text/html",
                        b"<html><body>videocutout service; UI bundle not built. "
                        b"API at /api/v1/</body></html>")
            raise ApiError(404, "no UI bundle")
        rel = "/".join(parts) if parts else "index.html"
        path = (self.ui_dir / rel).resolve()
        if not str(path).startswith(str(self.ui_dir.resolve())) or not path.is_file():
            raise ApiError(404, f"no such file {rel!r}")
        types = {".html": "text/html", ".js": "text/javascript",
                 ".css": "text/css", ".map": "application/json",
                 ".png": "image/png", ".svg": "image/svg+xml"}
        return 200, types.get(path.suffix, "application/octet-stream"), path.read_bytes()


def _json(status, payload):
    return status, "application/json", json.dumps(payload).encode()


def _parse_json(body: bytes) -> dict:
    if not body:
        return {}
    try:
        out = json.loads(body.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ApiError(400, f"malformed JSON body: {exc}")
    if not isinstance(out, dict):
        raise ApiError(400, "JSON body must be an object")
    return out


def make_handler(service: AnnotationService):
    class Handler(BaseHTTPRequestHandler):
        def _serve(self):
            length = int(self.headers.get("Content-Length") or 0)
            body = self.rfile.read(length) if length else b""
            status, ctype, payload = service.dispatch(self.command, self.path, body)
            self.send_response(status)
            self.send_header("Content-Type", ctype)
            self.send_header("Content-Length", str(len(payload)))
            self.end_headers()
            self.wfile.write(payload)

        do_GET = do_POST = do_PUT = _serve

        def log_message(self, fmt, *args):  # quiet by default
            pass

    return Handler


def serve(host: str = "127.0.0.1", port: int = 8765,
          config: RunConfig | None = None, ui_dir=None) -> None:
    """Run the service until interrupted; prints the bound address."""
    service = AnnotationService(config, ui_dir=ui_dir)
    server = ThreadingHTTPServer((host, port), make_handler(service))
    print(f"serving on http://{host}:{server.server_address[1]}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
