import { describe, expect, it } from "vitest";

import { patchQuad3d, project, quatRotate } from "../src/geometry.js";
import type { PatchPayload, PosePayload } from "../src/types.js";

const IDENTITY: PosePayload = { rotation: [1, 0, 0, 0], translation: [0, 0, 0] };
const K = { fx: 600, fy: 600, cx: 320, cy: 240, width: 640, height: 480 };

describe("quatRotate", () => {
  it("identity leaves vectors unchanged", () => {
    expect(quatRotate([1, 0, 0, 0], [0.3, -0.2, 0.9])).toEqual([0.3, -0.2, 0.9]);
  });

  it("quarter turn about +Y maps +Z to +X", () => {
    const s = Math.SQRT1_2;
    const out = quatRotate([s, 0, s, 0], [0, 0, 1]);
    expect(out[0]).toBeCloseTo(1, 12);
    expect(out[1]).toBeCloseTo(0, 12);
    expect(out[2]).toBeCloseTo(0, 12);
  });
});

describe("project", () => {
  it("optical axis hits the principal point", () => {
    expect(project(K, IDENTITY, [0, 0, 1])).toEqual([320, 240]);
  });

  it("off-axis point follows fx/z", () => {
    const out = project(K, IDENTITY, [0.1, 0, 1])!;
    expect(out[0]).toBeCloseTo(380, 9);
    expect(out[1]).toBeCloseTo(240, 9);
  });

  it("behind-camera point is null", () => {
    expect(project(K, IDENTITY, [0, 0, -1])).toBeNull();
  });

  it("applies the camera pose before projecting", () => {
    const camFromLayout: PosePayload = {
      rotation: [1, 0, 0, 0],
      translation: [0, 0, 2],
    };
    expect(project(K, camFromLayout, [0, 0, 0])).toEqual([320, 240]);
  });
});

describe("patchQuad3d", () => {
  const patch: PatchPayload = {
    index: 0,
    center: [0, 0, 0.4],
    orientation: [1, 0, 0, 0], // local +Z already along the center direction
    half_angle: 0.1,
    collected: false,
  };

  it("centers the quad on the patch center", () => {
    const quad = patchQuad3d(patch);
    const mean = quad
      .reduce((acc, c) => [acc[0] + c[0], acc[1] + c[1], acc[2] + c[2]], [0, 0, 0])
      .map((v) => v / 4);
    expect(mean[0]).toBeCloseTo(0, 12);
    expect(mean[1]).toBeCloseTo(0, 12);
    expect(mean[2]).toBeCloseTo(0.4, 12);
  });

  it("sizes corners by radius * tan(half angle)", () => {
    const quad = patchQuad3d(patch);
    const half = 0.4 * Math.tan(0.1);
    for (const corner of quad) {
      const d = Math.hypot(corner[0], corner[1], corner[2] - 0.4);
      expect(d).toBeCloseTo(half * Math.SQRT2, 12);
    }
  });
});
