// Hemisphere overlay: project the uncollected patch rectangles through the
// latest camera pose and paint them semi-transparently over the video.
//
// Model computation is kept separate from canvas painting so the logic is
// testable headlessly: the model always carries one entry per patch in the
// status payload, and `drawn` counts the quads that would actually be painted.

import { patchQuad3d, project, Vec2 } from "./geometry.js";
import type {
  IntrinsicsPayload,
  PosePayload,
  StatusPayload,
} from "./types.js";

export interface OverlayPatch {
  index: number;
  collected: boolean;
  quad: Vec2[] | null; // projected corners; null when not drawable
}

export interface OverlayModel {
  total: number; // one per patch in the status payload
  hidden: boolean; // true when the mode says not to show the hemisphere
  patches: OverlayPatch[];
  drawn: number; // uncollected patches with a drawable quad
}

export function computeOverlay(
  status: StatusPayload,
  K: IntrinsicsPayload,
  camFromLayout: PosePayload | null,
): OverlayModel {
  const hidden = !status.show_hemisphere;
  const patches: OverlayPatch[] = status.patches.map((patch) => {
    if (hidden || patch.collected || camFromLayout === null) {
      return { index: patch.index, collected: patch.collected, quad: null };
    }
    const corners = patchQuad3d(patch).map((p) => project(K, camFromLayout, p));
    const quad = corners.every((c) => c !== null) ? (corners as Vec2[]) : null;
    return { index: patch.index, collected: patch.collected, quad };
  });
  return {
    total: patches.length,
    hidden,
    patches,
    drawn: patches.filter((p) => p.quad !== null).length,
  };
}

const FILL = "rgba(80, 180, 255, 0.35)";
const EDGE = "rgba(30, 120, 200, 0.8)";

export function paintOverlay(
  canvas: HTMLCanvasElement,
  model: OverlayModel,
): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) {
    return; // headless test environment; the model is asserted instead
  }
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  if (model.hidden) {
    return;
  }
  for (const patch of model.patches) {
    if (!patch.quad) {
      continue;
    }
    ctx.beginPath();
    ctx.moveTo(patch.quad[0][0], patch.quad[0][1]);
    for (const [u, v] of patch.quad.slice(1)) {
      ctx.lineTo(u, v);
    }
    ctx.closePath();
    ctx.fillStyle = FILL;
    ctx.fill();
    ctx.strokeStyle = EDGE;
    ctx.stroke();
  }
}
