import assert from "node:assert/strict";
import { test } from "node:test";

import { CommandScheduler, keyToCommand, DEFAULT_STEPS } from "../src/keymap.js";

test("W maps to move_forward at the default step", () => {
  const cmd = keyToCommand("w");
  assert.deepEqual(cmd, { type: "command", kind: "move_forward",
                          magnitude: DEFAULT_STEPS.translation });
});

test("arrows map to rotations, space to stop, others to nothing", () => {
  assert.equal(keyToCommand("ArrowLeft")?.kind, "yaw_left");
  assert.equal(keyToCommand("ArrowDown")?.kind, "pitch_down");
  assert.deepEqual(keyToCommand(" "),
    { type: "command", kind: "stop", magnitude: 0 });
  assert.equal(keyToCommand("x"), null);
});

test("magnitudes come from the settings panel values", () => {
  const cmd = keyToCommand("d", { translation: 0.5, rotationDeg: 30 });
  assert.equal(cmd?.magnitude, 0.5);
  assert.equal(keyToCommand("ArrowRight", { translation: 0.5, rotationDeg: 30 })?.magnitude, 30);
});

test("key sequence W, W, ArrowRight produces three messages in order", () => {
  const sched = new CommandScheduler(400);
  const out = [
    sched.keyEvent("w", 0),
    sched.keyEvent("w", 50),
    sched.keyEvent("ArrowRight", 100),
  ];
  assert.deepEqual(out.map(c => c?.kind),
    ["move_forward", "move_forward", "yaw_right"]);
});

test("held-key auto-repeat is limited to one command per interval", () => {
  const sched = new CommandScheduler(400);
  assert.ok(sched.keyEvent("w", 0, false));
  assert.equal(sched.keyEvent("w", 100, true), null);
  assert.equal(sched.keyEvent("w", 399, true), null);
  assert.ok(sched.keyEvent("w", 401, true));
});

test("idle emits one stop heartbeat per chunk interval", () => {
  const sched = new CommandScheduler(400);
  sched.keyEvent("w", 0);
  assert.equal(sched.idleTick(100), null);
  const beat = sched.idleTick(450);
  assert.deepEqual(beat, { type: "command", kind: "stop", magnitude: 0 });
  assert.equal(sched.idleTick(500), null);
  assert.ok(sched.idleTick(900));
});
