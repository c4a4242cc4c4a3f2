import { describe, expect, it } from "vitest";

import { defaultScenario, fromRequest, toRequest } from "../src/types.js";

describe("scenario wire format", () => {
  it("exports the exact request body shape", () => {
    const req = toRequest(defaultScenario());
    expect(Object.keys(req).sort()).toEqual(["geology", "mode", "well"]);
    expect(Object.keys(req.geology).sort()).toEqual(
      ["control_grid_size", "control_values", "gradient_x", "gradient_y", "seed"]);
    expect(req.well.cell).toEqual([32, 32]);
    expect(req.mode).toBe("surrogate");
  });

  it("round trips through JSON unchanged", () => {
    const s = defaultScenario();
    s.gradientX = -42.5;
    s.well = { i: 10, j: 50, massRate: 0.07, injectionTemperature: 14 };
    s.controlValues[3] = 3.3e-8;
    const text = JSON.stringify(toRequest(s));
    const back = fromRequest(JSON.parse(text), s);
    expect(toRequest(back)).toEqual(toRequest(s));
  });

  it("import preserves display settings from the current state", () => {
    const current = defaultScenario();
    current.display.showLahmOutline = true;
    const imported = fromRequest(toRequest(defaultScenario()), current);
    expect(imported.display.showLahmOutline).toBe(true);
  });

  it("mode override produces a request for that mode only", () => {
    const s = defaultScenario();
    expect(toRequest(s, "simulate").mode).toBe("simulate");
    expect(s.mode).toBe("surrogate");
  });

  it("rejects documents that are not scenario requests", () => {
    expect(() => fromRequest(JSON.parse("{}"))).toThrow(/not a scenario request/);
  });

  it("fills optional fields with defaults on import", () => {
    const minimal = {
      geology: { seed: 5 },
      well: { cell: [1, 2] as [number, number] },
    };
    const s = fromRequest(minimal as never);
    expect(s.seed).toBe(5);
    expect(s.well.i).toBe(1);
    expect(s.well.massRate).toBeCloseTo(0.05);
    expect(s.controlValues).toHaveLength(16);
  });
});
