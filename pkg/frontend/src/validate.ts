// Client-side mirror of the service's scenario validation, so bad input is
// caught (and clamped where sensible) before a request goes out.

import { GRID_CELLS, UiScenario } from "./types.js";

export const PERM_MIN = 2.1e-9;
export const PERM_MAX = 4.1e-8;
export const GRADIENT_LIMIT = 150; // Pa/m, per component
export const CONTROL_GRID_SIZES = [4, 6, 8] as const;
export const AMBIENT_TEMPERATURE = 10; // degC

export interface ValidationResult {
  scenario: UiScenario;  // clamped copy, safe to submit
  warnings: string[];    // non-fatal adjustments that were applied
  errors: string[];      // must be fixed by the user, request blocked
}

export function clamp(v: number, lo: number, hi: number): number {
  return Math.min(hi, Math.max(lo, v));
}

export function validateScenario(s: UiScenario): ValidationResult {
  const warnings: string[] = [];
  const errors: string[] = [];
  const out: UiScenario = {
    ...s,
    controlValues: [...s.controlValues],
    well: { ...s.well },
    display: { ...s.display },
  };

  if (!CONTROL_GRID_SIZES.includes(out.controlGridSize as 4 | 6 | 8)) {
    errors.push(`control grid size must be one of ${CONTROL_GRID_SIZES.join(", ")}`);
  } else if (out.controlValues.length !== out.controlGridSize ** 2) {
    errors.push(
      `expected ${out.controlGridSize ** 2} control values, got ${out.controlValues.length}`);
  }

  let clampedPerm = 0;
  for (let k = 0; k < out.controlValues.length; k++) {
    const v = out.controlValues[k];
    if (!Number.isFinite(v)) {
      errors.push(`control value ${k} is not a number`);
      continue;
    }
    const c = clamp(v, PERM_MIN, PERM_MAX);
    if (c !== v) {
      out.controlValues[k] = c;
      clampedPerm++;
    }
  }
  if (clampedPerm > 0) {
    warnings.push(
      `${clampedPerm} permeability value(s) clamped to [${PERM_MIN}, ${PERM_MAX}]`);
  }

  for (const [name, v] of [["x", out.gradientX], ["y", out.gradientY]] as const) {
    if (!Number.isFinite(v)) {
      errors.push(`gradient ${name} is not a number`);
    } else if (Math.abs(v) > GRADIENT_LIMIT) {
      const c = clamp(v, -GRADIENT_LIMIT, GRADIENT_LIMIT);
      if (name === "x") out.gradientX = c; else out.gradientY = c;
      warnings.push(`gradient ${name} clamped to +/-${GRADIENT_LIMIT} Pa/m`);
    }
  }

  const { i, j } = out.well;
  if (!Number.isInteger(i) || !Number.isInteger(j)
      || i < 0 || i >= GRID_CELLS || j < 0 || j >= GRID_CELLS) {
    errors.push(`well cell (${i}, ${j}) outside the ${GRID_CELLS}x${GRID_CELLS} grid`);
  }
  if (!(out.well.massRate > 0)) {
    errors.push("well mass rate must be positive");
  }
  if (!(out.well.injectionTemperature > AMBIENT_TEMPERATURE)) {
    errors.push(`injection temperature must exceed the ${AMBIENT_TEMPERATURE} degC ambient`);
  }

  if (!Number.isInteger(out.seed) || out.seed < 0) {
    errors.push("seed must be a non-negative integer");
  }

  return { scenario: out, warnings, errors };
}

// Resize the control lattice, resampling the old values with nearest-neighbor
// so the texture the user sketched survives a 4 -> 6 -> 8 switch.
export function resampleControlValues(
  values: number[], oldSize: number, newSize: number,
): number[] {
  if (values.length !== oldSize * oldSize) {
    throw new Error(`expected ${oldSize * oldSize} values, got ${values.length}`);
  }
  if (newSize === oldSize) return [...values];
  const out = new Array<number>(newSize * newSize);
  for (let r = 0; r < newSize; r++) {
    for (let c = 0; c < newSize; c++) {
      const r0 = Math.min(oldSize - 1, Math.round((r * (oldSize - 1)) / (newSize - 1)));
      const c0 = Math.min(oldSize - 1, Math.round((c * (oldSize - 1)) / (newSize - 1)));
      out[r * newSize + c] = values[r0 * oldSize + c0];
    }
  }
  return out;
}
