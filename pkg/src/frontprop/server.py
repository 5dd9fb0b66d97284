"""HTTP session service consumed by the scribble UI.

JSON-over-HTTP with one in-memory session per uploaded image. Segmentation
runs on a worker thread; progress is exposed by polling (the solver writes its
accepted-pixel count into a shared array as it marches).
"""

from __future__ import annotations

import threading
import time
import uuid
from dataclasses import dataclass, field

import numpy as np
from fastapi import Body, FastAPI, File, Response, UploadFile
from fastapi.responses import JSONResponse

from . import appio
from .features import ImageBuffer
from .fmm import SeedSets
from .metric import CostParams, MODE_FB, MODE_TUBE
from .pipeline import SegmentationResult, segment_fb, segment_tube

IDLE_TIMEOUT_S = 3600.0


@dataclass
class SessionRecord:
    id: str
    image: ImageBuffer
    seeds: SeedSets = None
    params: CostParams = None
    status: str = "idle"  # idle | running | done | failed
    last_result: SegmentationResult = None
    error: str = None
    run_id: str = None
    progress: np.ndarray = field(default_factory=lambda: np.zeros(2, dtype=np.int64))
    total: int = 0
    last_touched: float = field(default_factory=time.monotonic)
    lock: threading.Lock = field(default_factory=threading.Lock)

    def touch(self):
        self.last_touched = time.monotonic()


def _error(status, message):
    return JSONResponse({"detail": message}, status_code=status)


def create_app(idle_timeout=IDLE_TIMEOUT_S) -> FastAPI:
    app = FastAPI(title="frontprop session service")
    sessions: dict[str, SessionRecord] = {}
    registry_lock = threading.Lock()

    def _expire():
        now = time.monotonic()
        with registry_lock:
            stale = [sid for sid, s in sessions.items()
                     if s.status != "running" and now - s.last_touched > idle_timeout]
            for sid in stale:
                del sessions[sid]

    def _get(session_id):
        _expire()
        sess = sessions.get(session_id)
        if sess is not None:
            sess.touch()
        return sess

    @app.post("/api/sessions", status_code=201)
    async def create_session(image: UploadFile = File(...)):
        data = await image.read()
        try:
            buf = appio.load_image(data)
        except appio.DataError as e:
            return _error(422, str(e))
        sess = SessionRecord(id=uuid.uuid4().hex, image=buf)
        with registry_lock:
            sessions[sess.id] = sess
        return {"id": sess.id, "width": buf.grid.width, "height": buf.grid.height}

    @app.put("/api/sessions/{session_id}/seeds", status_code=204)
    async def put_seeds(session_id: str, payload: dict = Body(...)):
        sess = _get(session_id)
        if sess is None:
            return _error(404, "unknown session")
        try:
            sess.seeds = appio.parse_seeds(payload, sess.image.grid)
        except appio.DataError as e:
            return _error(422, str(e))
        return Response(status_code=204)

    @app.get("/api/sessions/{session_id}/seeds")
    async def get_seeds(session_id: str):
        sess = _get(session_id)
        if sess is None:
            return _error(404, "unknown session")
        if sess.seeds is None:
            return {"sets": []}
        return appio.seeds_to_json(sess.seeds)

    def _run_job(sess: SessionRecord, mode, params, n_th, t_h):
        try:
            if mode == MODE_FB:
                result = segment_fb(sess.image, sess.seeds, params,
                                    progress_out=sess.progress, compute_kappa=False)
            else:
                result = segment_tube(sess.image, sess.seeds, params, n_th=n_th,
                                      t_h=t_h, progress_out=sess.progress,
                                      compute_kappa=False)
            sess.last_result = result
            sess.status = "done"
        except Exception as e:  # surfaced through /progress
            sess.error = str(e)
            sess.status = "failed"
        finally:
            sess.touch()

    @app.post("/api/sessions/{session_id}/run", status_code=202)
    async def start_run(session_id: str, payload: dict = Body(default={})):
        sess = _get(session_id)
        if sess is None:
            return _error(404, "unknown session")
        mode = payload.get("mode", MODE_FB)
        if mode not in (MODE_FB, MODE_TUBE):
            return _error(422, f"unknown mode {mode!r}")
        if sess.seeds is None:
            return _error(422, "session has no seeds")
        if mode == MODE_FB and len(sess.seeds.labels) < 2:
            return _error(422, "FB mode needs at least 2 seed sets")
        if mode == MODE_TUBE and len(sess.seeds.labels) != 1:
            return _error(422, "tube mode needs exactly 1 seed set")
        n_th = payload.get("n_th")
        if mode == MODE_TUBE:
            if n_th is None:
                return _error(422, "tube mode requires n_th")
            n_th = int(n_th)
            if n_th < sess.seeds.total():
                return _error(422, "n_th must be at least the seed count")
        t_h = payload.get("t_h")
        try:
            params = CostParams(**payload.get("params", {}))
        except (TypeError, ValueError) as e:
            return _error(422, f"bad params: {e}")
        with sess.lock:
            if sess.status == "running":
                return _error(409, "a run is already in flight")
            sess.status = "running"
            sess.run_id = uuid.uuid4().hex
            sess.params = params
            sess.progress[:] = 0
            grid = sess.image.grid
            sess.total = grid.size if mode == MODE_FB else min(int(n_th), grid.size)
        worker = threading.Thread(target=_run_job, args=(sess, mode, params, n_th, t_h),
                                  daemon=True)
        worker.start()
        return {"run_id": sess.run_id}

    @app.get("/api/sessions/{session_id}/progress")
    async def progress(session_id: str):
        sess = _get(session_id)
        if sess is None:
            return _error(404, "unknown session")
        out = {"status": sess.status,
               "accepted_count": int(sess.progress[0]),
               "total": int(sess.total)}
        if sess.status == "failed":
            out["error"] = sess.error
        return out

    def _result_or_error(session_id):
        sess = _get(session_id)
        if sess is None:
            return None, _error(404, "unknown session")
        if sess.last_result is None:
            return None, _error(404, "no result yet")
        return sess, None

    @app.get("/api/sessions/{session_id}/label.png")
    async def label_png(session_id: str):
        sess, err = _result_or_error(session_id)
        if err is not None:
            return err
        data = appio.label_map_png_bytes(sess.last_result.label_map)
        return Response(content=data, media_type="image/png")

    @app.get("/api/sessions/{session_id}/contours.json")
    async def contours(session_id: str):
        sess, err = _result_or_error(session_id)
        if err is not None:
            return err
        return appio.contours_to_json(sess.last_result.contours)

    @app.get("/api/sessions/{session_id}/distance.bin")
    async def distance(session_id: str):
        sess, err = _result_or_error(session_id)
        if err is not None:
            return err
        import io as _io
        buf = _io.BytesIO()
        appio.write_distance_map(sess.last_result.distance_map, buf)
        return Response(content=buf.getvalue(), media_type="application/octet-stream")

    @app.delete("/api/sessions/{session_id}", status_code=204)
    async def delete_session(session_id: str):
        with registry_lock:
            if session_id not in sessions:
                return _error(404, "unknown session")
            del sessions[session_id]
        return Response(status_code=204)

    return app


def serve(host="127.0.0.1", port=8000, static_dir=None):
    import uvicorn

    app = create_app()
    if static_dir:
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")
    uvicorn.run(app, host=host, port=port)
