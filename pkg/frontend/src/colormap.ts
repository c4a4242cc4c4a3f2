// Fixed-range temperature colormap. The scale is pinned to 10..15 degC so
// frames from different scenarios stay visually comparable; values outside
// the range are clamped for drawing and reported via the out-of-range flag.

export interface Rgb { r: number; g: number; b: number }

// Compact blue -> white -> red ramp, perceptually close to coolwarm.
const STOPS: Array<[number, Rgb]> = [
  [0.0, { r: 59, g: 76, b: 192 }],
  [0.25, { r: 124, g: 159, b: 249 }],
  [0.5, { r: 229, g: 229, b: 229 }],
  [0.75, { r: 246, g: 142, b: 97 }],
  [1.0, { r: 180, g: 4, b: 38 }],
];

export function rampColor(t: number): Rgb {
  const x = Math.min(1, Math.max(0, t));
  for (let i = 1; i < STOPS.length; i++) {
    const [x1, c1] = STOPS[i];
    const [x0, c0] = STOPS[i - 1];
    if (x <= x1) {
      const f = (x - x0) / (x1 - x0);
      return {
        r: Math.round(c0.r + f * (c1.r - c0.r)),
        g: Math.round(c0.g + f * (c1.g - c0.g)),
        b: Math.round(c0.b + f * (c1.b - c0.b)),
      };
    }
  }
  return STOPS[STOPS.length - 1][1];
}

export interface MappedField {
  rgba: Uint8ClampedArray; // 4 * n, ready for ImageData
  outOfRange: boolean;     // any value outside [lo, hi] before clamping
  min: number;
  max: number;
}

export function mapTemperature(
  values: Float32Array | Float64Array | number[],
  lo = 10, hi = 15,
): MappedField {
  const n = values.length;
  const rgba = new Uint8ClampedArray(4 * n);
  let outOfRange = false;
  let min = Infinity;
  let max = -Infinity;
  const span = hi - lo;
  for (let k = 0; k < n; k++) {
    const v = Number(values[k]);
    if (v < min) min = v;
    if (v > max) max = v;
    // tiny tolerance: float32 round-trips of exactly 10.0 must not flag
    if (v < lo - 1e-6 || v > hi + 1e-6) outOfRange = true;
    const c = rampColor((v - lo) / span);
    rgba[4 * k] = c.r;
    rgba[4 * k + 1] = c.g;
    rgba[4 * k + 2] = c.b;
    rgba[4 * k + 3] = 255;
  }
  return { rgba, outOfRange, min, max };
}

// Symmetric diverging map for signed error fields, centered on zero.
export function mapSignedError(
  values: Float32Array | Float64Array | number[], limit: number,
): MappedField {
  const n = values.length;
  const rgba = new Uint8ClampedArray(4 * n);
  const span = limit > 0 ? limit : 1;
  let min = Infinity;
  let max = -Infinity;
  for (let k = 0; k < n; k++) {
    const v = Number(values[k]);
    if (v < min) min = v;
    if (v > max) max = v;
    const c = rampColor(0.5 + 0.5 * Math.min(1, Math.max(-1, v / span)));
    rgba[4 * k] = c.r;
    rgba[4 * k + 1] = c.g;
    rgba[4 * k + 2] = c.b;
    rgba[4 * k + 3] = 255;
  }
  return { rgba, outOfRange: false, min, max };
}
