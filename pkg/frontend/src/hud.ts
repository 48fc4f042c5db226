// HUD formatting and drawing helpers: pose readout, coverage bar, chunk
// index, FPS, round-trip latency, trajectory minimap.

import { ClientState, meanLatency } from "./state.js";

export function formatLatency(state: ClientState): string {
  const mean = meanLatency(state);
  return mean === null ? "—" : `${mean.toFixed(0)} ms`;
}

export function formatPose(state: ClientState): string {
  if (state.pose === null) return "pose —";
  const [x, y, z] = state.pose.translation;
  return `pos (${x.toFixed(2)}, ${y.toFixed(2)}, ${z.toFixed(2)})`;
}

export function coverageFraction(state: ClientState): number {
  return Math.min(1, Math.max(0, state.coverage));
}

export function hudLines(state: ClientState): string[] {
  return [
    `chunk ${state.lastChunkIndex < 0 ? "—" : state.lastChunkIndex}`,
    formatPose(state),
    `coverage ${(coverageFraction(state) * 100).toFixed(0)}%`,
    `fps ${state.fps.toFixed(1)}`,
    `latency ${formatLatency(state)}`,
    state.droppedFrames > 0 ? `dropped ${state.droppedFrames}` : "",
  ].filter(line => line.length > 0);
}
