// Client-side session state. The server is authoritative: displayed pose
// and trajectory come only from chunk messages, never from local
// integration, and frames render strictly in chunk-index order.

import { ChunkMessage, MetricsMessage, PosePayload, ReadyMessage, ServerMessage } from "./protocol.js";

export type ConnectionStatus = "idle" | "connecting" | "ready" | "closed" | "error";

export interface ClientState {
  status: ConnectionStatus;
  sessionId: string | null;
  width: number;
  height: number;
  chunkLen: number;
  encoding: "f32" | "png";
  lastChunkIndex: number;
  pose: PosePayload | null;
  trajectory: PosePayload[];
  coverage: number;
  fps: number;
  latencySamples: number[];
  droppedFrames: number;
  outOfOrderDropped: number;
  lastError: string | null;
}

export function initialState(): ClientState {
  return {
    status: "idle",
    sessionId: null,
    width: 0,
    height: 0,
    chunkLen: 0,
    encoding: "f32",
    lastChunkIndex: -1,
    pose: null,
    trajectory: [],
    coverage: 0,
    fps: 0,
    latencySamples: [],
    droppedFrames: 0,
    outOfOrderDropped: 0,
    lastError: null,
  };
}

export interface ApplyResult {
  state: ClientState;
  /** chunk accepted for display this update, if any */
  displayChunk: ChunkMessage | null;
}

const LATENCY_WINDOW = 60;

export function applyServerMessage(state: ClientState, msg: ServerMessage): ApplyResult {
  switch (msg.type) {
    case "ready": {
      const ready = msg as ReadyMessage;
      return {
        state: {
          ...initialState(),
          status: "ready",
          sessionId: ready.session_id,
          width: ready.width,
          height: ready.height,
          chunkLen: ready.k,
          encoding: ready.encoding,
        },
        displayChunk: null,
      };
    }
    case "chunk": {
      const chunk = msg as ChunkMessage;
      if (chunk.index <= state.lastChunkIndex) {
        // Impossible per protocol; drop and count rather than regress.
        return {
          state: { ...state, outOfOrderDropped: state.outOfOrderDropped + 1 },
          displayChunk: null,
        };
      }
      const next: ClientState = {
        ...state,
        lastChunkIndex: chunk.index,
        pose: chunk.pose,
        trajectory: [...state.trajectory, chunk.pose],
        coverage: chunk.coverage,
        droppedFrames: state.droppedFrames + (chunk.frames === null ? 1 : 0),
      };
      return { state: next, displayChunk: chunk.frames === null ? null : chunk };
    }
    case "metrics": {
      const metrics = msg as MetricsMessage;
      const samples = [...state.latencySamples, metrics.latency_ms];
      if (samples.length > LATENCY_WINDOW) samples.shift();
      return {
        state: { ...state, fps: metrics.fps, latencySamples: samples },
        displayChunk: null,
      };
    }
    case "error":
      return {
        state: { ...state, status: "error", lastError: `${msg.code}: ${msg.text}` },
        displayChunk: null,
      };
  }
}

export function meanLatency(state: ClientState): number | null {
  if (state.latencySamples.length === 0) return null;
  const sum = state.latencySamples.reduce((a, b) => a + b, 0);
  return sum / state.latencySamples.length;
}
