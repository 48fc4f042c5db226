// Top-down (x, z) minimap of the trajectory history.

import { PosePayload, yawFromQuaternion } from "./protocol.js";

export interface MinimapPoint {
  x: number;
  y: number; // minimap pixel y (world +z up the screen)
}

export interface MinimapLayout {
  points: MinimapPoint[];
  scale: number; // pixels per world unit
  headingRad: number | null;
}

/**
 * Fit the trajectory into a size x size panel with a margin; the first pose
 * is centered when there is no spread. World x maps right, world z maps up.
 */
export function layoutMinimap(trajectory: PosePayload[], size: number,
                              margin = 6): MinimapLayout {
  if (trajectory.length === 0) return { points: [], scale: 1, headingRad: null };
  const xs = trajectory.map(p => p.translation[0]);
  const zs = trajectory.map(p => p.translation[2]);
  const minX = Math.min(...xs), maxX = Math.max(...xs);
  const minZ = Math.min(...zs), maxZ = Math.max(...zs);
  const span = Math.max(maxX - minX, maxZ - minZ, 1e-9);
  const scale = (size - 2 * margin) / span;
  const cx = (minX + maxX) / 2, cz = (minZ + maxZ) / 2;
  const points = trajectory.map(p => ({
    x: size / 2 + (p.translation[0] - cx) * scale,
    y: size / 2 - (p.translation[2] - cz) * scale,
  }));
  const headingRad = yawFromQuaternion(trajectory[trajectory.length - 1].quaternion);
  return { points, scale, headingRad };
}

/** Start-to-end distance at minimap scale; a closed loop stays within 1px. */
export function loopClosurePx(layout: MinimapLayout): number {
  if (layout.points.length < 2) return 0;
  const a = layout.points[0];
  const b = layout.points[layout.points.length - 1];
  return Math.hypot(a.x - b.x, a.y - b.y);
}
