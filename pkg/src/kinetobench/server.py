"""Websocket service speaking protocol v1 (see docs/PROTOCOL.md).

Frames are JSON documents in websocket text messages (the transport's own
length-prefixed framing).  One session per server process: the first client
to complete the hello handshake becomes the driver; later clients are
read-only observers receiving the identical snapshot stream.

Three periodic activities, per the session config:

- haptic loop (background thread, haptic_hz): ticks the engine on the latest
  pointer sample and publishes the encoded snapshot into an atomic slot;
- analysis pacing (analysis_hz) refreshes the service stats document;
- broadcast loop (asyncio task, broadcast_hz): fans the latest snapshot out
  to every connected client.

Force output is therefore decimated from haptic_hz to broadcast_hz on the
wire; the hello response reports that decimation factor so clients can
reason about tick gaps.
"""

from __future__ import annotations

import asyncio
import json
import threading
import time
from contextlib import asynccontextmanager

from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from kinetobench.model import model_hash
from kinetobench.session import (
    PROTOCOL_VERSION,
    HapticEngine,
    SessionConfig,
    WorkingMode,
    encode_snapshot,
)


class SessionService:
    """Engine + pointer slot + snapshot slot shared between loops."""

    def __init__(self, config: SessionConfig):
        self.config = config
        self.engine = HapticEngine(config)
        self._latest_pointer: tuple[float, float] | None = None
        self._latest_seq = -1
        self.latest_frame: str | None = None
        self.stats = {"ticks": 0, "last_tick_ns": 0}
        self._stop = threading.Event()
        self._thread: threading.Thread | None = None
        self._lock = threading.Lock()  # guards engine config mutations only

    # -- pointer ingress (single writer: the driver connection)

    def submit_pointer(self, seq: int, x: float, y: float) -> bool:
        if seq <= self._latest_seq:
            return False
        self._latest_seq = seq
        self._latest_pointer = (x, y)
        return True

    def set_mode(self, mode: WorkingMode) -> None:
        with self._lock:
            self.engine.set_mode(mode)

    def set_params(self, params: dict) -> None:
        with self._lock:
            self.engine.update_params(**params)

    # -- haptic loop

    def _run(self) -> None:
        period = 1.0 / self.config.haptic_hz
        analysis_every = max(1, round(self.config.haptic_hz / self.config.analysis_hz))
        deadline = time.perf_counter()
        while not self._stop.is_set():
            t0 = time.perf_counter_ns()
            with self._lock:
                snap = self.engine.tick(self._latest_pointer)
            self.latest_frame = encode_snapshot(snap)
            took = time.perf_counter_ns() - t0
            self.stats["ticks"] += 1
            if self.stats["ticks"] % analysis_every == 0:
                self.stats["last_tick_ns"] = took
            deadline += period
            delay = deadline - time.perf_counter()
            if delay > 0:
                time.sleep(delay)
            else:
                deadline = time.perf_counter()  # fell behind: resynchronize

    def start(self) -> None:
        self._thread = threading.Thread(target=self._run, name="haptic-loop", daemon=True)
        self._thread.start()

    def stop(self) -> None:
        self._stop.set()
        if self._thread is not None:
            self._thread.join(timeout=2.0)

    def hello_frame(self) -> dict:
        cfg = self.config
        return {
            "kind": "hello",
            "version": PROTOCOL_VERSION,
            "session_config": {
                "mode": str(self.engine.mode),
                "sensitivity": cfg.sensitivity,
                "scale_factors": cfg.scale_factors,
                "view_zoom": cfg.view_zoom,
                "rates": {
                    "haptic_hz": cfg.haptic_hz,
                    "analysis_hz": cfg.analysis_hz,
                    "broadcast_hz": cfg.broadcast_hz,
                },
                "force_decimation": max(1, cfg.haptic_hz // cfg.broadcast_hz),
                "home": list(cfg.home),
            },
            "model": cfg.model.to_dict(),
            "model_hash": model_hash(cfg.model),
        }


def _error_frame(code: str, reason: str) -> str:
    return json.dumps({"kind": "error", "code": code, "reason": reason}, sort_keys=True)


def make_app(config: SessionConfig) -> FastAPI:
    service = SessionService(config)

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        service.start()
        broadcaster = asyncio.create_task(_broadcast_loop(app))
        yield
        broadcaster.cancel()
        service.stop()

    app = FastAPI(lifespan=lifespan)
    app.state.service = service
    app.state.clients = []
    app.state.driver = None

    async def _broadcast_loop(app: FastAPI) -> None:
        period = 1.0 / config.broadcast_hz
        while True:
            frame = service.latest_frame
            if frame is not None:
                # identical payload to every client, driver or observer
                for ws in list(app.state.clients):
                    try:
                        await ws.send_text(frame)
                    except Exception:
                        pass  # connection teardown races are handled in the endpoint
            await asyncio.sleep(period)

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        await ws.accept()
        try:
            raw = await ws.receive_text()
            hello = json.loads(raw)
        except WebSocketDisconnect:
            return
        except (json.JSONDecodeError, UnicodeDecodeError):
            await ws.send_text(_error_frame("malformed", "hello frame is not valid JSON"))
            await ws.close()
            return
        if not isinstance(hello, dict) or hello.get("kind") != "hello":
            await ws.send_text(_error_frame("malformed", "first frame must be hello"))
            await ws.close()
            return
        if hello.get("version") != PROTOCOL_VERSION:
            await ws.send_text(
                _error_frame(
                    "bad_version",
                    f"protocol version {hello.get('version')!r} unsupported; "
                    f"server speaks {PROTOCOL_VERSION}",
                )
            )
            await ws.close()
            return

        is_driver = app.state.driver is None
        if is_driver:
            app.state.driver = ws
        app.state.clients.append(ws)
        await ws.send_text(json.dumps(service.hello_frame(), sort_keys=True))

        try:
            while True:
                raw = await ws.receive_text()
                try:
                    msg = json.loads(raw)
                    kind = msg["kind"]
                except (json.JSONDecodeError, KeyError, TypeError):
                    await ws.send_text(_error_frame("malformed", "frame must be JSON with a kind"))
                    await ws.close()
                    return
                if kind not in ("pointer", "set_mode", "set_params"):
                    await ws.send_text(_error_frame("malformed", f"unknown kind {kind!r}"))
                    await ws.close()
                    return
                if not is_driver:
                    await ws.send_text(
                        _error_frame("not_driver", "read-only observer; input ignored")
                    )
                    continue
                try:
                    if kind == "pointer":
                        service.submit_pointer(int(msg["seq"]), float(msg["x"]), float(msg["y"]))
                    elif kind == "set_mode":
                        service.set_mode(WorkingMode.parse(f"{msg['s1']}{msg['s2']}"))
                    else:
                        service.set_params(dict(msg.get("params", {})))
                except (KeyError, TypeError, ValueError) as e:
                    await ws.send_text(_error_frame("malformed", f"bad {kind} frame: {e}"))
                    await ws.close()
                    return
        except WebSocketDisconnect:
            pass
        finally:
            if ws in app.state.clients:
                app.state.clients.remove(ws)
            if app.state.driver is ws:
                app.state.driver = None

    return app


def serve(config: SessionConfig, host: str = "127.0.0.1", port: int = 8700) -> None:
    """Run the service until interrupted (blocking)."""
    import uvicorn

    uvicorn.run(make_app(config), host=host, port=port, log_level="warning")
