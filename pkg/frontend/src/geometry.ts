// Just enough 3D math to draw the hemisphere overlay: quaternion rotation,
// pinhole projection, and the tangent-plane rectangle of a viewpoint patch.

import type { IntrinsicsPayload, PatchPayload, PosePayload } from "./types.js";

export type Vec3 = [number, number, number];
export type Vec2 = [number, number];

export function quatRotate(q: number[], v: Vec3): Vec3 {
  const [w, x, y, z] = q;
  const [vx, vy, vz] = v;
  // v' = v + 2 * cross(q.xyz, cross(q.xyz, v) + w * v)
  const cx = y * vz - z * vy + w * vx;
  const cy = z * vx - x * vz + w * vy;
  const cz = x * vy - y * vx + w * vz;
  return [
    vx + 2 * (y * cz - z * cy),
    vy + 2 * (z * cx - x * cz),
    vz + 2 * (x * cy - y * cx),
  ];
}

/** Transform a layout-frame point into the camera frame via cam_from_layout. */
export function transform(pose: PosePayload, p: Vec3): Vec3 {
  const r = quatRotate(pose.rotation, p);
  return [
    r[0] + pose.translation[0],
    r[1] + pose.translation[1],
    r[2] + pose.translation[2],
  ];
}

/** Pinhole projection; null when the point is at or behind the camera. */
export function project(
  K: IntrinsicsPayload,
  camFromLayout: PosePayload,
  p: Vec3,
): Vec2 | null {
  const [x, y, z] = transform(camFromLayout, p);
  if (z <= 1e-6) {
    return null;
  }
  return [(K.fx * x) / z + K.cx, (K.fy * y) / z + K.cy];
}

/** 3D corners of a patch rectangle: tangent-plane square of the patch's
 * angular half-size, oriented by the patch quaternion (local +Z = outward). */
export function patchQuad3d(patch: PatchPayload): Vec3[] {
  const c = patch.center as Vec3;
  const radius = Math.hypot(c[0], c[1], c[2]);
  const half = radius * Math.tan(patch.half_angle);
  const ex = quatRotate(patch.orientation, [1, 0, 0]);
  const ey = quatRotate(patch.orientation, [0, 1, 0]);
  const corner = (sx: number, sy: number): Vec3 => [
    c[0] + sx * half * ex[0] + sy * half * ey[0],
    c[1] + sx * half * ex[1] + sy * half * ey[1],
    c[2] + sx * half * ex[2] + sy * half * ey[2],
  ];
  return [corner(-1, 1), corner(1, 1), corner(1, -1), corner(-1, -1)];
}
