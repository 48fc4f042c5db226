"""Streaming session service.

One websocket connection = one generation session. JSON envelopes,
snake_case fields:

client -> server:
    {"type": "hello", "episode_id": str} or {"type": "hello", "scene_seed": int}
    {"type": "command", "kind": str, "magnitude": float}
    {"type": "freeze", "value": bool}
    {"type": "bye"}

server -> client:
    {"type": "ready", "session_id", "width", "height", "k", "encoding"}
    {"type": "chunk", "index", "pose": {"quaternion", "translation"},
     "coverage", "frames"}            # frames null when backpressure drops them
    {"type": "metrics", "fps", "latency_ms", "dropped"}
    {"type": "error", "code", "text"}

Commands arriving while a chunk is being generated coalesce latest-wins;
chunk indices always advance by exactly one (the envelope is never
dropped, only its frame payload).
"""

from __future__ import annotations

import asyncio
import base64
import io
import json
import time
import uuid
from pathlib import Path
from typing import Optional

import numpy as np

from roamgen.geometry import (
    InteractionCommand,
    Intrinsics,
    rotation_to_quaternion,
)
from roamgen.microworld import (
    build_scene,
    generate_episode,
    load_episode,
    sample_command_script,
    script_to_poses,
)
from roamgen.model import NoiseSchedule, load_checkpoint
from roamgen.engine.session import Session

SEND_QUEUE_LIMIT = 4


class EpisodeStore:
    """Episodes by directory name, plus on-demand scene-seed generation."""

    def __init__(self, root: Optional[str | Path], chunk_len: int,
                 frame_size: int, scripted_chunks: int = 8):
        self.root = Path(root) if root else None
        self.chunk_len = chunk_len
        self.frame_size = frame_size
        self.scripted_chunks = scripted_chunks

    def lookup(self, episode_id: Optional[str], scene_seed: Optional[int]):
        if episode_id is not None:
            if self.root is None:
                raise KeyError(episode_id)
            path = self.root / episode_id
            if not (path / "meta.json").exists():
                raise KeyError(episode_id)
            return load_episode(path)
        if scene_seed is None:
            raise ValueError("hello needs episode_id or scene_seed")
        scene = build_scene(int(scene_seed), "static")
        rng = np.random.default_rng(int(scene_seed))
        poses = script_to_poses(sample_command_script(rng, self.scripted_chunks),
                                self.chunk_len)
        k = Intrinsics.default(self.frame_size, self.frame_size)
        return generate_episode(scene, poses, k, self.chunk_len)


def encode_frames(frames: np.ndarray, png: bool):
    """Raw little-endian f32 base64, or a list of per-frame PNGs."""
    if not png:
        return base64.b64encode(frames.astype("<f4").tobytes()).decode("ascii")
    from PIL import Image

    out = []
    for frame in frames:
        img = Image.fromarray((np.clip(frame, 0, 1) * 255).astype(np.uint8))
        buf = io.BytesIO()
        img.save(buf, format="PNG")
        out.append(base64.b64encode(buf.getvalue()).decode("ascii"))
    return out


def pose_payload(pose) -> dict:
    return {"quaternion": rotation_to_quaternion(pose.rotation).tolist(),
            "translation": pose.translation.tolist()}


class SessionWorker:
    def __init__(self, websocket, model, schedule, store: EpisodeStore, png: bool):
        self.ws = websocket
        self.model = model
        self.schedule = schedule
        self.store = store
        self.png = png
        self.session: Optional[Session] = None
        self.pending: Optional[InteractionCommand] = None
        self.pending_at = 0.0
        self.wake = asyncio.Event()
        self.closing = False
        self.dropped = 0
        self.send_queue: asyncio.Queue = asyncio.Queue()
        self.chunk_times: list = []

    async def send(self, message: dict) -> None:
        await self.ws.send(json.dumps(message))

    async def error(self, code: str, text: str) -> None:
        await self.send({"type": "error", "code": code, "text": text})

    async def handshake(self) -> bool:
        raw = await self.ws.recv()
        try:
            msg = json.loads(raw)
        except json.JSONDecodeError:
            await self.error("bad_message", "hello must be JSON")
            return False
        if msg.get("type") != "hello":
            await self.error("bad_handshake", "first message must be hello")
            return False
        try:
            episode = self.store.lookup(msg.get("episode_id"), msg.get("scene_seed"))
        except KeyError as exc:
            await self.error("not_found", f"unknown episode {exc}")
            return False
        except ValueError as exc:
            await self.error("bad_handshake", str(exc))
            return False
        seed = int(msg.get("seed", 0))
        self.session = Session(model=self.model, schedule=self.schedule,
                               reference=episode, seed=seed)
        k = episode.intrinsics
        await self.send({"type": "ready",
                         "session_id": uuid.uuid4().hex,
                         "width": k.width, "height": k.height,
                         "k": episode.chunk_len,
                         "encoding": "png" if self.png else "f32"})
        return True

    async def reader(self) -> None:
        try:
            async for raw in self.ws:
                try:
                    msg = json.loads(raw)
                except json.JSONDecodeError:
                    await self.error("bad_message", "not JSON")
                    continue
                kind = msg.get("type")
                if kind == "command":
                    try:
                        cmd = InteractionCommand(msg["kind"],
                                                 float(msg.get("magnitude", 0.0)))
                    except (KeyError, ValueError) as exc:
                        await self.error("bad_command", str(exc))
                        continue
                    self.pending = cmd          # latest wins within a chunk
                    self.pending_at = time.perf_counter()
                    self.wake.set()
                elif kind == "freeze":
                    self.session.freeze_time = bool(msg.get("value", False))
                elif kind == "bye":
                    break
                elif kind == "hello":
                    await self.error("bad_message", "session already started")
                else:
                    await self.error("bad_message", f"unknown type {kind!r}")
        finally:
            self.closing = True
            self.wake.set()

    async def sender(self) -> None:
        while True:
            message = await self.send_queue.get()
            if message is None:
                return
            await self.send(message)

    async def generator(self) -> None:
        while not self.closing:
            await self.wake.wait()
            self.wake.clear()
            while self.pending is not None and not self.closing:
                cmd, self.pending = self.pending, None
                received = self.pending_at
                t0 = time.perf_counter()
                frames, warps = await asyncio.to_thread(self.session.step, cmd)
                now = time.perf_counter()
                self.chunk_times.append(now)
                index = self.session.chunk_index - 1
                congested = self.send_queue.qsize() >= SEND_QUEUE_LIMIT
                if congested:
                    self.dropped += 1
                payload = None if congested else encode_frames(frames, self.png)
                coverage = float(np.mean([w.mask.mean() for w in warps]))
                self.send_queue.put_nowait({
                    "type": "chunk", "index": index,
                    "pose": pose_payload(self.session.pose),
                    "coverage": coverage, "frames": payload,
                })
                recent = [t for t in self.chunk_times if now - t <= 5.0]
                self.chunk_times = recent
                fps = len(recent) / 5.0 * self.session.reference.chunk_len
                self.send_queue.put_nowait({
                    "type": "metrics", "fps": fps,
                    "latency_ms": (now - received) * 1000.0,
                    "dropped": self.dropped,
                })

    async def run(self) -> None:
        if not await self.handshake():
            return
        sender = asyncio.create_task(self.sender())
        generator = asyncio.create_task(self.generator())
        try:
            await self.reader()
        finally:
            self.closing = True
            self.wake.set()
            generator.cancel()
            await self.send_queue.put(None)
            await asyncio.gather(sender, generator, return_exceptions=True)


async def serve_sessions(host: str, port: int, checkpoint_path: str | Path,
                         episodes_dir: Optional[str | Path] = None, *,
                         png: bool = False, frame_size: int = 64,
                         ready: Optional[asyncio.Event] = None) -> None:
    """Accept connections until cancelled; one isolated session each."""
    from websockets.asyncio.server import serve

    model, manifest = load_checkpoint(checkpoint_path)
    if manifest.get("stage") in (None, "untrained"):
        raise ValueError("checkpoint has no trained stage; refusing to serve")
    model.eval()
    model.requires_grad_(False)
    schedule = NoiseSchedule(tuple(manifest["schedule"])) if "schedule" in manifest \
        else NoiseSchedule()
    store = EpisodeStore(episodes_dir, model.config.frames_per_chunk, frame_size)

    async def handler(websocket):
        await SessionWorker(websocket, model, schedule, store, png).run()

    async with serve(handler, host, port):
        if ready is not None:
            ready.set()
        await asyncio.Future()
