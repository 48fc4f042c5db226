// Keyboard -> command mapping. Every distinct key event emits one command
// message; auto-repeat is rate-limited to one command per chunk interval;
// an idle stop heartbeat fires once per interval when no keys arrive.

import { CommandKind, CommandMessage } from "./protocol.js";

export interface StepSettings {
  translation: number; // world units per command
  rotationDeg: number; // degrees per command
}

export const DEFAULT_STEPS: StepSettings = { translation: 0.25, rotationDeg: 15 };

const KEY_TO_KIND: Record<string, CommandKind> = {
  w: "move_forward",
  s: "move_back",
  a: "strafe_left",
  d: "strafe_right",
  q: "move_up",
  e: "move_down",
  arrowleft: "yaw_left",
  arrowright: "yaw_right",
  arrowup: "pitch_up",
  arrowdown: "pitch_down",
  " ": "stop",
};

const ROTATION_KINDS = new Set<CommandKind>(
  ["yaw_left", "yaw_right", "pitch_up", "pitch_down"]);

export function keyToCommand(key: string,
                             steps: StepSettings = DEFAULT_STEPS): CommandMessage | null {
  const kind = KEY_TO_KIND[key.toLowerCase()];
  if (kind === undefined) return null;
  const magnitude = kind === "stop" ? 0
    : ROTATION_KINDS.has(kind) ? steps.rotationDeg : steps.translation;
  return { type: "command", kind, magnitude };
}

export class CommandScheduler {
  private lastEmit = -Infinity;
  private lastActivity = -Infinity;

  constructor(private intervalMs: number,
              public steps: StepSettings = { ...DEFAULT_STEPS }) {}

  /** One command per key event; held-key repeats capped at one per interval. */
  keyEvent(key: string, nowMs: number, isRepeat = false): CommandMessage | null {
    const cmd = keyToCommand(key, this.steps);
    if (cmd === null) return null;
    if (isRepeat && nowMs - this.lastEmit < this.intervalMs) return null;
    this.lastEmit = nowMs;
    this.lastActivity = nowMs;
    return cmd;
  }

  /** Stop heartbeat once per interval while no key events arrive. */
  idleTick(nowMs: number): CommandMessage | null {
    if (nowMs - this.lastActivity < this.intervalMs) return null;
    this.lastActivity = nowMs;
    return { type: "command", kind: "stop", magnitude: 0 };
  }
}
