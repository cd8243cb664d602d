"""Live session service: WebSocket control + audio streaming over one port.

Each connection owns an isolated engine seeded from the base seed plus a
session counter. The client's pose messages are treated as ground truth;
the detection/fusion/smoothing pipeline still runs on top of them so the
curator hears real tracking behavior, not an idealized pose.

Message flow per session:
  client -> server (text JSON): pose_set, edit_source, set_ambient_gain,
      snapshot_request; run_blocks (unpaced test mode only).
  server -> client: "state" (10 Hz), "meters" (per block), "event"
      (engagement events), "error"; binary audio frames with a 1-byte
      0x01 tag, a little-endian uint32 sequence number, and interleaved
      16-bit PCM.

All sends are awaited, so a slow consumer stalls the stream rather than
reordering or dropping frames.
"""

from __future__ import annotations

import asyncio
import json
import math
import struct
from dataclasses import replace
from pathlib import Path

from fastapi import FastAPI, Request, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .engine import Engine
from .geometry import Pose2D
from .render import quantize_pcm16
from .scene import Scene, scene_from_dict, scene_to_dict

AUDIO_TAG = 0x01
STATE_INTERVAL = 0.1

# edit_source fields forwarded verbatim onto the SoundSource
_SOURCE_FIELDS = ("gain", "d_ref", "d_cull", "r_on", "r_off", "priority")


def _dumps(msg: dict) -> str:
    return json.dumps(msg, sort_keys=True, separators=(",", ":"))


class _Session:
    """One connection: an engine, its pose feed, and the outgoing streams."""

    def __init__(self, ws: WebSocket, app: FastAPI, session_id: int) -> None:
        self.ws = ws
        self.app = app
        self.id = session_id
        self.seed = app.state.base_seed + session_id
        self.pace: bool = app.state.pace
        self.engine = Engine(app.state.scene, seed=self.seed)
        self.block_dt = self.engine.block_dt
        self.pose = self.engine.rendered
        self.pending: list[tuple[float, Pose2D]] = []
        self.seq = 0
        self.next_state_t = 0.0

    async def send_json(self, msg: dict) -> None:
        await self.ws.send_text(_dumps(msg))

    async def send_error(self, message: str) -> None:
        await self.send_json({"type": "error", "message": message})

    async def send_state(self) -> None:
        snap = self.engine.snapshot()
        snap.update({"type": "state", "session": self.id, "seed": self.seed})
        await self.send_json(snap)

    async def produce_block(self) -> None:
        t_block = self.engine.t
        while self.pending and self.pending[0][0] <= t_block + 1e-9:
            self.pose = self.pending.pop(0)[1]
        block, events = self.engine.step(self.pose)
        pcm = quantize_pcm16(block.frames)
        header = bytes([AUDIO_TAG]) + struct.pack("<I", self.seq)
        await self.ws.send_bytes(header + pcm.tobytes())
        for ev in events:
            await self.send_json({"type": "event", **ev.to_record()})
        await self.send_json(
            {
                "type": "meters",
                "t": block.t_start,
                "seq": self.seq,
                "virtual_rms": block.virtual_rms,
                "ambient_rms": block.ambient_rms,
                "clipped": block.clipped,
            }
        )
        if t_block + 1e-9 >= self.next_state_t:
            await self.send_state()
            self.next_state_t += STATE_INTERVAL
        self.seq += 1

    # -- control messages ----------------------------------------------------

    async def handle(self, raw: str) -> None:
        try:
            msg = json.loads(raw)
        except json.JSONDecodeError as exc:
            await self.send_error(f"malformed JSON: {exc}")
            return
        if not isinstance(msg, dict) or "type" not in msg:
            await self.send_error("message must be an object with a 'type'")
            return
        kind = msg["type"]
        try:
            if kind == "pose_set":
                self._pose_set(msg)
            elif kind == "edit_source":
                self._edit_source(msg)
            elif kind == "set_ambient_gain":
                self._set_ambient_gain(msg)
            elif kind == "snapshot_request":
                await self.send_state()
            elif kind == "run_blocks":
                await self._run_blocks(msg)
            else:
                await self.send_error(f"unknown message type: {kind!r}")
        except (ValueError, TypeError, KeyError) as exc:
            await self.send_error(f"{kind}: {exc}")

    def _pose_set(self, msg: dict) -> None:
        pose = Pose2D(
            float(msg["x"]), float(msg["y"]), math.radians(float(msg["h_deg"]))
        )
        stamp = float(msg["t"]) if "t" in msg else self.engine.t
        if self.engine.block_index == 0 and stamp <= 1e-9:
            # initial placement: there is nothing to smooth from yet, so
            # seat the pose state directly (replayable offline by starting
            # the engine at this pose)
            self.engine.reset_pose(pose)
        if "t" in msg:
            # timestamped poses apply at the first block at or after t,
            # which makes scripted sessions replayable offline
            self.pending.append((stamp, pose))
            self.pending.sort(key=lambda p: p[0])
        else:
            self.pose = pose

    def _edit_source(self, msg: dict) -> None:
        sid = msg["id"]
        scene = self.engine.scene
        sources = list(scene.sources)
        idx = next((i for i, s in enumerate(sources) if s.id == sid), None)
        if idx is None:
            raise ValueError(f"unknown source id {sid!r}")
        src = sources[idx]
        changes: dict = {}
        if "x" in msg or "y" in msg:
            x = float(msg.get("x", src.position[0]))
            y = float(msg.get("y", src.position[1]))
            changes["position"] = (x, y)
        for name in _SOURCE_FIELDS:
            if name in msg:
                value = msg[name]
                changes[name] = int(value) if name == "priority" else float(value)
        unknown = set(msg) - {"type", "id", "x", "y", *_SOURCE_FIELDS}
        if unknown:
            raise ValueError(f"unsupported edit fields: {sorted(unknown)}")
        sources[idx] = replace(src, **changes)
        edited = replace(scene, sources=tuple(sources))
        self.engine.update_scene(edited)
        # the edit becomes the authoring document, so GET /scene round-trips
        self.app.state.scene = edited

    def _set_ambient_gain(self, msg: dict) -> None:
        gain = float(msg["gain"])
        scene = self.engine.scene
        if scene.ambient is None:
            raise ValueError("scene has no ambient bed")
        edited = replace(scene, ambient=replace(scene.ambient, gain=gain))
        self.engine.update_scene(edited)
        self.app.state.scene = edited

    async def _run_blocks(self, msg: dict) -> None:
        if self.pace:
            raise ValueError("run_blocks is only available in unpaced mode")
        n = int(msg["n"])
        if n < 0 or n > 100_000:
            raise ValueError("n out of range")
        for _ in range(n):
            await self.produce_block()

    # -- lifecycle -----------------------------------------------------------

    async def _producer(self) -> None:
        loop = asyncio.get_running_loop()
        start = loop.time()
        while True:
            target = start + (self.seq + 1) * self.block_dt
            delay = target - loop.time()
            if delay > 0:
                await asyncio.sleep(delay)
            await self.produce_block()

    async def run(self) -> None:
        await self.ws.accept()
        await self.send_state()
        producer = asyncio.create_task(self._producer()) if self.pace else None
        try:
            while True:
                raw = await self.ws.receive_text()
                await self.handle(raw)
        except WebSocketDisconnect:
            pass
        finally:
            if producer is not None:
                producer.cancel()
                try:
                    await producer
                except (asyncio.CancelledError, Exception):
                    pass


def create_app(
    scene: Scene,
    base_seed: int = 0,
    pace: bool = True,
    ui_dir: Path | None = None,
) -> FastAPI:
    """Build the service around a validated scene.

    pace=False disables the wall-clock block producer; blocks are then
    driven explicitly by run_blocks messages, which scripted clients and
    tests use for deterministic sessions. ui_dir, if given, is served
    as static files under /ui so the bundled preview page can run off
    the same origin as the protocol.
    """
    app = FastAPI(title="aarsim")
    app.state.scene = scene
    app.state.base_seed = base_seed
    app.state.pace = pace
    app.state.session_count = 0
    app.state.active = 0

    @app.get("/health")
    async def health() -> dict:
        return {"status": "ok", "sessions": app.state.active}

    @app.get("/scene")
    async def get_scene() -> JSONResponse:
        return JSONResponse(scene_to_dict(app.state.scene))

    @app.put("/scene")
    async def put_scene(request: Request) -> JSONResponse:
        try:
            doc = await request.json()
        except json.JSONDecodeError as exc:
            return JSONResponse({"error": f"malformed JSON: {exc}"}, status_code=400)
        try:
            new_scene = scene_from_dict(
                doc, base_dir=app.state.scene.base_dir, check_clips=True
            )
        except ValueError as exc:
            return JSONResponse({"error": str(exc)}, status_code=400)
        app.state.scene = new_scene
        return JSONResponse({"ok": True, "sources": len(new_scene.sources)})

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket) -> None:
        app.state.session_count += 1
        app.state.active += 1
        session = _Session(ws, app, app.state.session_count)
        try:
            await session.run()
        finally:
            app.state.active -= 1

    if ui_dir is not None:
        if not ui_dir.is_dir():
            raise ValueError(f"ui directory not found: {ui_dir}")
        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
