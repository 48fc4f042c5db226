"""Loopback integration tests for the session service."""

from __future__ import annotations

import asyncio
import base64
import json
import socket

import numpy as np
import pytest
import torch

from roamgen.geometry import Intrinsics
from roamgen.microworld import (
    build_scene,
    generate_episode,
    sample_command_script,
    save_episode,
    script_to_poses,
)
from roamgen.model import Denoiser, DenoiserConfig, save_checkpoint
from roamgen.server import serve_sessions

CFG = DenoiserConfig(layers=1, heads=2, width=32, patch=8, frame_height=16,
                     frame_width=16, frames_per_chunk=2, tag_vocab=8)


def free_port() -> int:
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


@pytest.fixture(scope="module")
def server_env(tmp_path_factory):
    root = tmp_path_factory.mktemp("srv")
    torch.manual_seed(0)
    model = Denoiser(CFG)
    with torch.no_grad():
        geo_w = model.geo_out.weight.clone()
        for p in model.parameters():
            p.zero_()
        model.geo_out.weight.copy_(geo_w)
    ckpt = root / "ckpt"
    save_checkpoint(model, ckpt, stage="jdmd")
    k = Intrinsics.default(16, 16)
    scene = build_scene(7, "static")
    rng = np.random.default_rng(7)
    poses = script_to_poses(sample_command_script(rng, 3), CFG.frames_per_chunk)
    episodes = root / "episodes"
    save_episode(generate_episode(scene, poses, k, CFG.frames_per_chunk),
                 episodes / "demo")
    return ckpt, episodes


async def start_server(ckpt, episodes, png=False):
    port = free_port()
    ready = asyncio.Event()
    task = asyncio.create_task(serve_sessions(
        "127.0.0.1", port, ckpt, episodes, png=png, frame_size=16, ready=ready))
    await asyncio.wait_for(ready.wait(), 10)
    return task, f"ws://127.0.0.1:{port}"


async def recv_json(ws):
    return json.loads(await asyncio.wait_for(ws.recv(), 20))


class TestServer:
    def test_unknown_episode_rejected(self, server_env):
        async def scenario():
            from websockets.asyncio.client import connect
            task, url = await start_server(*server_env)
            try:
                async with connect(url) as ws:
                    await ws.send(json.dumps({"type": "hello",
                                              "episode_id": "missing"}))
                    msg = await recv_json(ws)
                    assert msg["type"] == "error"
                    assert msg["code"] == "not_found"
            finally:
                task.cancel()
        asyncio.run(scenario())

    def test_bad_handshake_rejected(self, server_env):
        async def scenario():
            from websockets.asyncio.client import connect
            task, url = await start_server(*server_env)
            try:
                async with connect(url) as ws:
                    await ws.send(json.dumps({"type": "command",
                                              "kind": "stop"}))
                    msg = await recv_json(ws)
                    assert msg["type"] == "error"
                    assert msg["code"] == "bad_handshake"
            finally:
                task.cancel()
        asyncio.run(scenario())

    def test_scripted_client_receives_ordered_chunks(self, server_env):
        async def scenario():
            from websockets.asyncio.client import connect
            task, url = await start_server(*server_env)
            try:
                async with connect(url) as ws:
                    await ws.send(json.dumps({"type": "hello",
                                              "episode_id": "demo"}))
                    ready = await recv_json(ws)
                    assert ready["type"] == "ready"
                    assert ready["width"] == 16 and ready["k"] == 2
                    n = 5
                    commands = [{"type": "command", "kind": "move_forward",
                                 "magnitude": 0.1},
                                {"type": "command", "kind": "yaw_left",
                                 "magnitude": 10.0}]
                    chunks, metrics = [], []
                    for i in range(n):
                        await ws.send(json.dumps(commands[i % 2]))
                        while True:
                            msg = await recv_json(ws)
                            if msg["type"] == "chunk":
                                chunks.append(msg)
                            elif msg["type"] == "metrics":
                                metrics.append(msg)
                                break
                    assert [c["index"] for c in chunks] == list(range(n))
                    raw = base64.b64decode(chunks[0]["frames"])
                    frames = np.frombuffer(raw, dtype="<f4")
                    assert frames.size == 2 * 16 * 16 * 3
                    assert 0.0 <= chunks[0]["coverage"] <= 1.0
                    assert all(m["latency_ms"] >= 0 for m in metrics)
                    assert all(m["dropped"] == 0 for m in metrics)
                    # pose mirrors the server-side command fold
                    assert len(chunks[0]["pose"]["quaternion"]) == 4
                    assert len(chunks[0]["pose"]["translation"]) == 3
                    await ws.send(json.dumps({"type": "bye"}))
            finally:
                task.cancel()
        asyncio.run(scenario())

    def test_two_clients_independent_streams(self, server_env):
        async def drive(url, kind, n):
            from websockets.asyncio.client import connect
            indices, poses = [], []
            async with connect(url) as ws:
                await ws.send(json.dumps({"type": "hello", "episode_id": "demo"}))
                assert (await recv_json(ws))["type"] == "ready"
                for _ in range(n):
                    await ws.send(json.dumps({"type": "command", "kind": kind,
                                              "magnitude": 0.2}))
                    while True:
                        msg = await recv_json(ws)
                        if msg["type"] == "chunk":
                            indices.append(msg["index"])
                            poses.append(msg["pose"]["translation"])
                        elif msg["type"] == "metrics":
                            break
            return indices, poses

        async def scenario():
            task, url = await start_server(*server_env)
            try:
                (ia, pa), (ib, pb) = await asyncio.gather(
                    drive(url, "move_forward", 4), drive(url, "move_back", 4))
                assert ia == [0, 1, 2, 3] and ib == [0, 1, 2, 3]
                # opposite motions: the two sessions never share pose state
                assert pa[-1][2] > pb[-1][2]
            finally:
                task.cancel()
        asyncio.run(scenario())

    def test_scene_seed_handshake_and_freeze(self, server_env):
        ckpt, _ = server_env

        async def scenario():
            from websockets.asyncio.client import connect
            task, url = await start_server(ckpt, None)
            try:
                async with connect(url) as ws:
                    await ws.send(json.dumps({"type": "hello", "scene_seed": 5}))
                    assert (await recv_json(ws))["type"] == "ready"
                    await ws.send(json.dumps({"type": "freeze", "value": True}))
                    await ws.send(json.dumps({"type": "command", "kind": "stop"}))
                    types = set()
                    while "metrics" not in types:
                        types.add((await recv_json(ws))["type"])
                    assert "chunk" in types
            finally:
                task.cancel()
        asyncio.run(scenario())

    def test_png_mode(self, server_env):
        ckpt, episodes = server_env

        async def scenario():
            from websockets.asyncio.client import connect
            task, url = await start_server(ckpt, episodes, png=True)
            try:
                async with connect(url) as ws:
                    await ws.send(json.dumps({"type": "hello",
                                              "episode_id": "demo"}))
                    ready = await recv_json(ws)
                    assert ready["encoding"] == "png"
                    await ws.send(json.dumps({"type": "command", "kind": "stop"}))
                    while True:
                        msg = await recv_json(ws)
                        if msg["type"] == "chunk":
                            break
                    from PIL import Image
                    import io
                    frames = msg["frames"]
                    assert isinstance(frames, list) and len(frames) == 2
                    img = Image.open(io.BytesIO(base64.b64decode(frames[0])))
                    assert img.size == (16, 16)
            finally:
                task.cancel()
        asyncio.run(scenario())

    def test_backpressure_drops_frames_not_chunks(self, server_env, monkeypatch):
        # With a zero-length send queue every chunk payload is "congested":
        # envelopes still arrive with contiguous indices, frames are null,
        # and metrics report the drop count.
        import roamgen.server as server_mod
        monkeypatch.setattr(server_mod, "SEND_QUEUE_LIMIT", 0)

        async def scenario():
            from websockets.asyncio.client import connect
            task, url = await start_server(*server_env)
            try:
                async with connect(url) as ws:
                    await ws.send(json.dumps({"type": "hello",
                                              "episode_id": "demo"}))
                    assert (await recv_json(ws))["type"] == "ready"
                    chunks, last_metrics = [], None
                    for _ in range(3):
                        await ws.send(json.dumps({"type": "command",
                                                  "kind": "stop"}))
                        while True:
                            msg = await recv_json(ws)
                            if msg["type"] == "chunk":
                                chunks.append(msg)
                            elif msg["type"] == "metrics":
                                last_metrics = msg
                                break
                    assert [c["index"] for c in chunks] == [0, 1, 2]
                    assert all(c["frames"] is None for c in chunks)
                    assert last_metrics["dropped"] == 3
            finally:
                task.cancel()
        asyncio.run(scenario())

    def test_untrained_checkpoint_refused(self, tmp_path):
        torch.manual_seed(1)
        ckpt = tmp_path / "untrained"
        save_checkpoint(Denoiser(CFG), ckpt)

        async def scenario():
            with pytest.raises(ValueError):
                await serve_sessions("127.0.0.1", free_port(), ckpt, None)
        asyncio.run(scenario())
