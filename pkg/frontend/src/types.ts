// Scenario state as the UI edits it, plus the wire formats of the service.
// The exported/imported JSON is exactly the /v1/predict request body, so a
// scenario saved here can be replayed with curl unchanged.

export type Mode = "surrogate" | "simulate" | "lahm";

export interface GridMeta {
  nx: number;
  ny: number;
  dx: number;
  dy: number;
  thickness: number;
}

export interface UiScenario {
  seed: number;
  controlGridSize: number;
  controlValues: number[]; // row-major, controlGridSize^2 permeability values
  gradientX: number;       // Pa/m
  gradientY: number;
  well: { i: number; j: number; massRate: number; injectionTemperature: number };
  mode: Mode;
  display: {
    showGlyphs: boolean;
    showLahmOutline: boolean;
    compare: boolean;
    colormapMin: number; // fixed 10..15 by default, kept in the state so an
    colormapMax: number; // export records what the user was looking at
  };
}

export interface ScenarioRequest {
  geology: {
    seed: number;
    control_grid_size: number;
    control_values: number[];
    gradient_x: number;
    gradient_y: number;
  };
  well: { cell: [number, number]; mass_rate: number; injection_temperature: number };
  mode: Mode;
  lahm?: Record<string, number>;
  encoding?: "base64" | "binary";
}

export interface Provenance {
  mode: Mode;
  service_version: string;
  model_fingerprint: string | null;
  timing_ms: number;
}

export interface FieldResponse {
  grid: GridMeta;
  channel_names: string[];
  container_b64: string;
  provenance: Provenance;
}

export interface ServiceError {
  error: { code: string; message: string };
}

export const GRID_CELLS = 64; // service-side default grid
export const DOMAIN_METERS = 128;

export function defaultScenario(): UiScenario {
  return {
    seed: 1,
    controlGridSize: 4,
    controlValues: new Array(16).fill(1.0e-8),
    gradientX: 120,
    gradientY: 0,
    well: { i: 32, j: 32, massRate: 0.05, injectionTemperature: 15 },
    mode: "surrogate",
    display: {
      showGlyphs: true,
      showLahmOutline: false,
      compare: false,
      colormapMin: 10,
      colormapMax: 15,
    },
  };
}

export function toRequest(s: UiScenario, mode?: Mode): ScenarioRequest {
  return {
    geology: {
      seed: s.seed,
      control_grid_size: s.controlGridSize,
      control_values: [...s.controlValues],
      gradient_x: s.gradientX,
      gradient_y: s.gradientY,
    },
    well: {
      cell: [s.well.i, s.well.j],
      mass_rate: s.well.massRate,
      injection_temperature: s.well.injectionTemperature,
    },
    mode: mode ?? s.mode,
  };
}

export function fromRequest(req: ScenarioRequest, base?: UiScenario): UiScenario {
  const s = base ?? defaultScenario();
  const g = req.geology;
  if (!g || !req.well || !Array.isArray(req.well.cell)) {
    throw new Error("not a scenario request: geology/well missing");
  }
  const size = g.control_grid_size ?? 4;
  const values = g.control_values ?? new Array(size * size).fill(1.0e-8);
  return {
    ...s,
    seed: g.seed ?? 1,
    controlGridSize: size,
    controlValues: [...values],
    gradientX: g.gradient_x ?? 0,
    gradientY: g.gradient_y ?? 0,
    well: {
      i: req.well.cell[0],
      j: req.well.cell[1],
      massRate: req.well.mass_rate ?? 0.05,
      injectionTemperature: req.well.injection_temperature ?? 15,
    },
    mode: req.mode ?? "surrogate",
  };
}
