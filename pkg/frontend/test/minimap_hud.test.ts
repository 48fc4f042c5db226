import assert from "node:assert/strict";
import { test } from "node:test";

import { layoutMinimap, loopClosurePx } from "../src/minimap.js";
import { hudLines, formatLatency, coverageFraction } from "../src/hud.js";
import { toneMapToRgba } from "../src/render.js";
import { applyServerMessage, initialState } from "../src/state.js";
import { PosePayload } from "../src/protocol.js";

function pose(x: number, z: number): PosePayload {
  return { quaternion: [1, 0, 0, 0], translation: [x, 0, z] };
}

test("square loop closes within one minimap pixel", () => {
  const loop = [pose(0, 0), pose(0, 1), pose(1, 1), pose(1, 0), pose(0, 1e-12)];
  const layout = layoutMinimap(loop, 140);
  assert.ok(loopClosurePx(layout) < 1.0);
});

test("open trajectory does not close", () => {
  const path = [pose(0, 0), pose(1, 0), pose(2, 0)];
  assert.ok(loopClosurePx(layoutMinimap(path, 140)) > 10);
});

test("single pose centers on the panel", () => {
  const layout = layoutMinimap([pose(3, -2)], 140);
  assert.equal(layout.points[0].x, 70);
  assert.equal(layout.points[0].y, 70);
});

test("latency shows an em dash with no samples", () => {
  assert.equal(formatLatency(initialState()), "—");
});

test("coverage clamps to the bar range and full coverage fills it", () => {
  let { state } = applyServerMessage(initialState(),
    { type: "ready", session_id: "s", width: 8, height: 8, k: 2, encoding: "f32" });
  ({ state } = applyServerMessage(state, {
    type: "chunk", index: 0, pose: pose(0, 0), coverage: 1.0, frames: null }));
  assert.equal(coverageFraction(state), 1.0);
  const lines = hudLines(state);
  assert.ok(lines.some(l => l.includes("coverage 100%")));
  assert.ok(lines.some(l => l.includes("dropped 1")));
});

test("tone map clamps to [0,1] and emits opaque RGBA", () => {
  const rgba = toneMapToRgba(new Float32Array([-0.5, 0.5, 2.0]), 1, 1);
  assert.deepEqual(Array.from(rgba), [0, 128, 255, 255]);
});
