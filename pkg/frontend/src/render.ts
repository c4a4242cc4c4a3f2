// Field rendering: color-mapped raster, velocity glyphs, and an iso-contour
// plume outline. Geometry extraction is pure (testable headlessly); only the
// draw* functions touch a canvas context.

import { mapSignedError, mapTemperature, MappedField } from "./colormap.js";

export interface Segment {
  x0: number; y0: number; x1: number; y1: number; // cell-center coordinates
}

// Marching squares on cell-centered values: one line segment per crossed
// square of four neighboring cells. Coordinates are in cell units with the
// value point at (i + 0.5, j + 0.5).
export function contourSegments(
  values: Float32Array | Float64Array | number[],
  nx: number, ny: number, level: number,
): Segment[] {
  const at = (i: number, j: number) => Number(values[j * nx + i]);
  const segs: Segment[] = [];
  const interp = (a: number, b: number) => {
    const d = b - a;
    return Math.abs(d) < 1e-30 ? 0.5 : (level - a) / d;
  };
  for (let j = 0; j < ny - 1; j++) {
    for (let i = 0; i < nx - 1; i++) {
      const v00 = at(i, j);         // bottom-left of the square
      const v10 = at(i + 1, j);
      const v01 = at(i, j + 1);
      const v11 = at(i + 1, j + 1);
      let mask = 0;
      if (v00 >= level) mask |= 1;
      if (v10 >= level) mask |= 2;
      if (v11 >= level) mask |= 4;
      if (v01 >= level) mask |= 8;
      if (mask === 0 || mask === 15) continue;
      const cx = i + 0.5;
      const cy = j + 0.5;
      // Edge crossing points (cell-unit coordinates).
      const bottom = { x: cx + interp(v00, v10), y: cy };
      const top = { x: cx + interp(v01, v11), y: cy + 1 };
      const left = { x: cx, y: cy + interp(v00, v01) };
      const right = { x: cx + 1, y: cy + interp(v10, v11) };
      const emit = (a: { x: number; y: number }, b: { x: number; y: number }) =>
        segs.push({ x0: a.x, y0: a.y, x1: b.x, y1: b.y });
      switch (mask) {
        case 1: case 14: emit(left, bottom); break;
        case 2: case 13: emit(bottom, right); break;
        case 3: case 12: emit(left, right); break;
        case 4: case 11: emit(right, top); break;
        case 6: case 9: emit(bottom, top); break;
        case 7: case 8: emit(left, top); break;
        case 5: emit(left, bottom); emit(right, top); break; // saddle
        case 10: emit(left, top); emit(bottom, right); break;
      }
    }
  }
  return segs;
}

export interface Glyph {
  x: number; y: number;  // cell-unit anchor
  dx: number; dy: number; // arrow, scaled so the longest is ~stride long
}

export function velocityGlyphs(
  qx: Float32Array | Float64Array | number[],
  qy: Float32Array | Float64Array | number[],
  nx: number, ny: number, stride = 4,
): Glyph[] {
  let vmax = 0;
  for (let k = 0; k < qx.length; k++) {
    const m = Math.hypot(Number(qx[k]), Number(qy[k]));
    if (m > vmax) vmax = m;
  }
  const glyphs: Glyph[] = [];
  if (vmax <= 0) return glyphs;
  const scale = (0.8 * stride) / vmax;
  const half = Math.floor(stride / 2);
  for (let j = half; j < ny; j += stride) {
    for (let i = half; i < nx; i += stride) {
      const k = j * nx + i;
      glyphs.push({
        x: i + 0.5, y: j + 0.5,
        dx: Number(qx[k]) * scale, dy: Number(qy[k]) * scale,
      });
    }
  }
  return glyphs;
}

export function maxValue(values: Float32Array | Float64Array | number[]): number {
  let m = -Infinity;
  for (let k = 0; k < values.length; k++) {
    const v = Number(values[k]);
    if (v > m) m = v;
  }
  return m;
}

export function signedDifference(
  a: Float32Array | Float64Array | number[],
  b: Float32Array | Float64Array | number[],
): Float64Array {
  if (a.length !== b.length) {
    throw new Error(`field length mismatch: ${a.length} vs ${b.length}`);
  }
  const out = new Float64Array(a.length);
  for (let k = 0; k < a.length; k++) out[k] = Number(a[k]) - Number(b[k]);
  return out;
}

// --- canvas drawing (not exercised by headless tests) ---

function putField(
  ctx: CanvasRenderingContext2D, mapped: MappedField, nx: number, ny: number,
): void {
  // Row 0 is y=0 at the domain bottom; canvas y grows downward, so draw to an
  // offscreen canvas then blit flipped and scaled.
  const off = document.createElement("canvas");
  off.width = nx;
  off.height = ny;
  const offCtx = off.getContext("2d")!;
  const img = offCtx.createImageData(nx, ny);
  img.data.set(mapped.rgba);
  offCtx.putImageData(img, 0, 0);
  ctx.save();
  ctx.imageSmoothingEnabled = false;
  ctx.translate(0, ctx.canvas.height);
  ctx.scale(ctx.canvas.width / nx, -(ctx.canvas.height / ny));
  ctx.drawImage(off, 0, 0);
  ctx.restore();
}

export function drawTemperature(
  ctx: CanvasRenderingContext2D,
  values: Float32Array, nx: number, ny: number, lo: number, hi: number,
): MappedField {
  const mapped = mapTemperature(values, lo, hi);
  putField(ctx, mapped, nx, ny);
  return mapped;
}

export function drawError(
  ctx: CanvasRenderingContext2D,
  values: Float64Array, nx: number, ny: number, limit: number,
): MappedField {
  const mapped = mapSignedError(values, limit);
  putField(ctx, mapped, nx, ny);
  return mapped;
}

function toCanvas(ctx: CanvasRenderingContext2D, nx: number, ny: number,
                  x: number, y: number): [number, number] {
  return [(x / nx) * ctx.canvas.width, (1 - y / ny) * ctx.canvas.height];
}

export function drawOutline(
  ctx: CanvasRenderingContext2D, segs: Segment[], nx: number, ny: number,
  color = "#1b5e20",
): void {
  ctx.save();
  ctx.strokeStyle = color;
  ctx.lineWidth = 2;
  ctx.setLineDash([6, 4]);
  ctx.beginPath();
  for (const s of segs) {
    const [ax, ay] = toCanvas(ctx, nx, ny, s.x0, s.y0);
    const [bx, by] = toCanvas(ctx, nx, ny, s.x1, s.y1);
    ctx.moveTo(ax, ay);
    ctx.lineTo(bx, by);
  }
  ctx.stroke();
  ctx.restore();
}

export function drawGlyphs(
  ctx: CanvasRenderingContext2D, glyphs: Glyph[], nx: number, ny: number,
): void {
  ctx.save();
  ctx.strokeStyle = "rgba(20, 20, 20, 0.75)";
  ctx.fillStyle = "rgba(20, 20, 20, 0.75)";
  ctx.lineWidth = 1;
  for (const g of glyphs) {
    const [ax, ay] = toCanvas(ctx, nx, ny, g.x, g.y);
    const [bx, by] = toCanvas(ctx, nx, ny, g.x + g.dx, g.y + g.dy);
    ctx.beginPath();
    ctx.moveTo(ax, ay);
    ctx.lineTo(bx, by);
    ctx.stroke();
    const ang = Math.atan2(by - ay, bx - ax);
    ctx.beginPath();
    ctx.moveTo(bx, by);
    ctx.lineTo(bx - 5 * Math.cos(ang - 0.4), by - 5 * Math.sin(ang - 0.4));
    ctx.lineTo(bx - 5 * Math.cos(ang + 0.4), by - 5 * Math.sin(ang + 0.4));
    ctx.closePath();
    ctx.fill();
  }
  ctx.restore();
}

export function drawWellMarker(
  ctx: CanvasRenderingContext2D, i: number, j: number, nx: number, ny: number,
): void {
  const [x, y] = toCanvas(ctx, nx, ny, i + 0.5, j + 0.5);
  ctx.save();
  ctx.strokeStyle = "#ffffff";
  ctx.fillStyle = "#7b1fa2";
  ctx.lineWidth = 2;
  ctx.beginPath();
  ctx.arc(x, y, 7, 0, 2 * Math.PI);
  ctx.fill();
  ctx.stroke();
  ctx.restore();
}
