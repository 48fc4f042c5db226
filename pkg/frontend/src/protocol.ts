// Wire protocol shared with the session server. Field names and casing are
// normative snake_case; the server is the source of truth for pose state.

export type CommandKind =
  | "move_forward" | "move_back" | "strafe_left" | "strafe_right"
  | "move_up" | "move_down" | "yaw_left" | "yaw_right"
  | "pitch_up" | "pitch_down" | "stop";

export interface HelloMessage {
  type: "hello";
  episode_id?: string;
  scene_seed?: number;
  seed?: number;
}

export interface CommandMessage {
  type: "command";
  kind: CommandKind;
  magnitude: number;
}

export interface FreezeMessage {
  type: "freeze";
  value: boolean;
}

export interface ByeMessage {
  type: "bye";
}

export type ClientMessage = HelloMessage | CommandMessage | FreezeMessage | ByeMessage;

export interface PosePayload {
  quaternion: [number, number, number, number]; // (w, x, y, z)
  translation: [number, number, number];
}

export interface ReadyMessage {
  type: "ready";
  session_id: string;
  width: number;
  height: number;
  k: number;
  encoding: "f32" | "png";
}

export interface ChunkMessage {
  type: "chunk";
  index: number;
  pose: PosePayload;
  coverage: number;
  frames: string | string[] | null; // null when backpressure dropped payload
}

export interface MetricsMessage {
  type: "metrics";
  fps: number;
  latency_ms: number;
  dropped: number;
}

export interface ErrorMessage {
  type: "error";
  code: string;
  text: string;
}

export type ServerMessage = ReadyMessage | ChunkMessage | MetricsMessage | ErrorMessage;

export function parseServerMessage(raw: string): ServerMessage {
  const msg = JSON.parse(raw);
  if (typeof msg !== "object" || msg === null || typeof msg.type !== "string") {
    throw new Error("malformed server message");
  }
  switch (msg.type) {
    case "ready":
    case "chunk":
    case "metrics":
    case "error":
      return msg as ServerMessage;
    default:
      throw new Error(`unknown server message type ${msg.type}`);
  }
}

export function encodeClientMessage(msg: ClientMessage): string {
  return JSON.stringify(msg);
}

/** Decode a base64 little-endian f32 frame payload into (k, h*w*3) floats. */
export function decodeF32Frames(payload: string, k: number, width: number,
                                height: number): Float32Array[] {
  const binary = typeof atob === "function"
    ? atob(payload)
    : Buffer.from(payload, "base64").toString("binary");
  const bytes = new Uint8Array(binary.length);
  for (let i = 0; i < binary.length; i++) bytes[i] = binary.charCodeAt(i);
  const all = new Float32Array(bytes.buffer);
  const perFrame = width * height * 3;
  if (all.length !== k * perFrame) {
    throw new Error(`frame payload holds ${all.length} floats, expected ${k * perFrame}`);
  }
  const frames: Float32Array[] = [];
  for (let f = 0; f < k; f++) {
    frames.push(all.subarray(f * perFrame, (f + 1) * perFrame));
  }
  return frames;
}

/** Camera yaw (radians about the down axis) from a (w,x,y,z) quaternion. */
export function yawFromQuaternion(q: [number, number, number, number]): number {
  const [w, x, y, z] = q;
  // forward = R @ (0,0,1); yaw = atan2(forward_x, forward_z)
  const fx = 2 * (x * z + w * y);
  const fz = 1 - 2 * (x * x + y * y);
  return Math.atan2(fx, fz);
}
