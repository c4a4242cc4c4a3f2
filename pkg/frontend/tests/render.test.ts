import { describe, expect, it } from "vitest";

import { mapSignedError, mapTemperature, rampColor } from "../src/colormap.js";
import {
  contourSegments, maxValue, signedDifference, velocityGlyphs,
} from "../src/render.js";

describe("temperature colormap", () => {
  it("maps the fixed 10..15 range ends to ramp ends", () => {
    const { rgba, outOfRange } = mapTemperature([10, 15]);
    expect(outOfRange).toBe(false);
    expect([rgba[0], rgba[1], rgba[2]]).toEqual([59, 76, 192]);   // cold end
    expect([rgba[4], rgba[5], rgba[6]]).toEqual([180, 4, 38]);    // hot end
    expect(rgba[3]).toBe(255);
  });

  it("flags values outside the fixed range and clamps the color", () => {
    const hot = mapTemperature([16.2]);
    expect(hot.outOfRange).toBe(true);
    expect([hot.rgba[0], hot.rgba[1], hot.rgba[2]]).toEqual([180, 4, 38]);
    const cold = mapTemperature([9.0]);
    expect(cold.outOfRange).toBe(true);
    expect([cold.rgba[0], cold.rgba[1], cold.rgba[2]]).toEqual([59, 76, 192]);
  });

  it("does not flag an exact boundary value", () => {
    expect(mapTemperature([10.0, 15.0, 12.5]).outOfRange).toBe(false);
  });

  it("reports min and max of the raw data", () => {
    const m = mapTemperature([11, 14.5, 10.2]);
    expect(m.min).toBeCloseTo(10.2);
    expect(m.max).toBeCloseTo(14.5);
  });

  it("ramp midpoint is the neutral color", () => {
    expect(rampColor(0.5)).toEqual({ r: 229, g: 229, b: 229 });
  });

  it("signed error map is symmetric around zero", () => {
    const m = mapSignedError([-1, 0, 1], 1);
    expect([m.rgba[4], m.rgba[5], m.rgba[6]]).toEqual([229, 229, 229]);
    expect([m.rgba[0], m.rgba[1], m.rgba[2]]).toEqual([59, 76, 192]);
    expect([m.rgba[8], m.rgba[9], m.rgba[10]]).toEqual([180, 4, 38]);
  });
});

describe("contourSegments", () => {
  it("finds no contour in a uniform field", () => {
    expect(contourSegments(new Array(16).fill(10), 4, 4, 10.5)).toEqual([]);
  });

  it("places the crossing at the linear interpolation point", () => {
    // single square: values 10 (left pair) and 11 (right pair), level 10.5
    const segs = contourSegments([10, 11, 10, 11], 2, 2, 10.5);
    expect(segs).toHaveLength(1);
    // vertical line crossing both horizontal edges at x = 1.0 (cell units)
    expect(segs[0].x0).toBeCloseTo(1.0);
    expect(segs[0].x1).toBeCloseTo(1.0);
  });

  it("draws a closed ring around a hot spot", () => {
    const n = 8;
    const vals = new Array(n * n).fill(10);
    vals[3 * n + 3] = 15;
    const segs = contourSegments(vals, n, n, 10.5);
    expect(segs.length).toBeGreaterThanOrEqual(4);
    // every endpoint of the ring stays within one cell of the hot spot
    for (const s of segs) {
      expect(Math.abs(s.x0 - 3.5)).toBeLessThanOrEqual(1.0);
      expect(Math.abs(s.y0 - 3.5)).toBeLessThanOrEqual(1.0);
    }
  });

  it("is scanned in row-major y-up layout", () => {
    // hot column at the top row only: contour must sit near y = ny-1
    const n = 4;
    const vals = new Array(n * n).fill(10);
    for (let i = 0; i < n; i++) vals[(n - 1) * n + i] = 12;
    const segs = contourSegments(vals, n, n, 11);
    expect(segs.length).toBeGreaterThan(0);
    for (const s of segs) {
      expect(s.y0).toBeGreaterThan(n - 2.1);
    }
  });
});

describe("velocityGlyphs", () => {
  it("returns an empty list for a still field", () => {
    const zeros = new Float32Array(64);
    expect(velocityGlyphs(zeros, zeros, 8, 8)).toEqual([]);
  });

  it("scales the longest arrow to under one stride", () => {
    const n = 16;
    const qx = new Float32Array(n * n).fill(2e-6);
    const qy = new Float32Array(n * n);
    const glyphs = velocityGlyphs(qx, qy, n, n, 4);
    expect(glyphs.length).toBe(16);
    for (const g of glyphs) {
      expect(Math.hypot(g.dx, g.dy)).toBeLessThanOrEqual(4);
      expect(g.dx).toBeGreaterThan(0);
      expect(g.dy).toBe(0);
    }
  });

  it("anchors glyphs at decimated cell centers", () => {
    const n = 8;
    const q = new Float32Array(n * n).fill(1);
    const glyphs = velocityGlyphs(q, q, n, n, 4);
    expect(glyphs.map((g) => [g.x, g.y])).toEqual([
      [2.5, 2.5], [6.5, 2.5], [2.5, 6.5], [6.5, 6.5],
    ]);
  });
});

describe("field helpers", () => {
  it("maxValue scans every cell", () => {
    expect(maxValue(new Float32Array([10, 14.75, 11]))).toBeCloseTo(14.75);
  });

  it("signedDifference is prediction minus truth", () => {
    const d = signedDifference([12, 10], [11, 10.5]);
    expect(Array.from(d)).toEqual([1, -0.5]);
  });

  it("signedDifference rejects length mismatches", () => {
    expect(() => signedDifference([1], [1, 2])).toThrow(/mismatch/);
  });
});
