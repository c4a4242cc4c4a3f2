// Wires the editing surface, the prediction scheduler, and the renderer
// together. All physics comes from the service; this file only moves state.

import { ApiError, PredictionResult, ServiceClient } from "./api.js";
import { PredictionScheduler } from "./scheduler.js";
import {
  contourSegments, drawError, drawGlyphs, drawOutline, drawTemperature,
  drawWellMarker, maxValue, signedDifference, velocityGlyphs,
} from "./render.js";
import {
  defaultScenario, fromRequest, GRID_CELLS, Mode, ScenarioRequest, toRequest,
  UiScenario,
} from "./types.js";
import { resampleControlValues, validateScenario, CONTROL_GRID_SIZES,
         GRADIENT_LIMIT, PERM_MAX, PERM_MIN } from "./validate.js";

const OUTLINE_LEVEL = 10.5; // degC iso-line marking the analytic plume edge

interface CachedFields {
  key: string;                 // scenario JSON the response belongs to
  byMode: Map<Mode, PredictionResult>;
}

export class PlannerApp {
  scenario: UiScenario = defaultScenario();
  private readonly client: ServiceClient;
  private readonly scheduler = new PredictionScheduler<boolean>();
  private cache: CachedFields = { key: "", byMode: new Map() };
  private canvases: Record<string, HTMLCanvasElement> = {};
  private status!: HTMLElement;
  private warnings!: HTMLElement;
  private errorBox!: HTMLElement;
  private readout!: HTMLElement;

  constructor(client?: ServiceClient) {
    this.client = client ?? new ServiceClient("");
  }

  mount(root: HTMLElement): void {
    root.innerHTML = "";
    root.appendChild(this.buildControls());
    root.appendChild(this.buildCanvasRow());
    this.status = el("div", "status");
    this.warnings = el("div", "warnings");
    this.errorBox = el("div", "error-box");
    this.readout = el("div", "readout");
    root.append(this.readout, this.warnings, this.errorBox, this.status);
    this.refresh();
  }

  // --- state changes (each one funnels into refresh -> debounced predict) ---

  update(patch: Partial<UiScenario>): void {
    this.scenario = { ...this.scenario, ...patch };
    this.refresh();
  }

  setControlValue(index: number, value: number): void {
    const values = [...this.scenario.controlValues];
    values[index] = value;
    this.update({ controlValues: values });
  }

  setControlGridSize(size: number): void {
    const values = resampleControlValues(
      this.scenario.controlValues, this.scenario.controlGridSize, size);
    this.update({ controlGridSize: size, controlValues: values });
  }

  setGradientDial(angleDeg: number, magnitude: number): void {
    const a = (angleDeg * Math.PI) / 180;
    this.update({
      gradientX: Math.cos(a) * magnitude,
      gradientY: Math.sin(a) * magnitude,
    });
  }

  moveWell(i: number, j: number): void {
    this.update({ well: { ...this.scenario.well, i, j } });
  }

  exportScenario(): string {
    return JSON.stringify(toRequest(this.scenario), null, 2);
  }

  importScenario(text: string): void {
    const req = JSON.parse(text) as ScenarioRequest;
    this.scenario = fromRequest(req, this.scenario);
    this.refresh();
  }

  // --- prediction plumbing ---

  private refresh(): void {
    const { scenario, warnings, errors } = validateScenario(this.scenario);
    this.warnings.textContent = warnings.join("; ");
    this.warnings.classList.toggle("visible", warnings.length > 0);
    if (errors.length > 0) {
      this.showError(`invalid scenario: ${errors.join("; ")}`, false);
      return;
    }
    this.errorBox.textContent = "";
    const submitted = scenario; // clamped copy
    const key = JSON.stringify(toRequest(submitted));
    if (key !== this.cache.key) {
      this.cache = { key, byMode: new Map() };
    }
    this.status.textContent = "predicting...";
    void this.scheduler
      .request(async () => {
        await this.ensureFields(submitted, key);
        return true;
      })
      .then(
        (done) => {
          if (done) this.redraw(submitted); // undefined = superseded, skip
        },
        (err) => this.showError(describeError(err), true),
      );
  }

  private async ensureFields(s: UiScenario, key: string): Promise<void> {
    const want: Mode[] = s.display.compare
      ? ["surrogate", "simulate"]
      : [s.mode];
    if (s.display.showLahmOutline && !this.cache.byMode.has("lahm")) {
      want.push("lahm");
    }
    for (const mode of want) {
      if (this.cache.key === key && this.cache.byMode.has(mode)) continue;
      const result = await this.client.predict(toRequest(s, mode));
      if (this.cache.key !== key) return; // superseded mid-flight
      this.cache.byMode.set(mode, result);
    }
  }

  private redraw(s: UiScenario): void {
    const primary = this.cache.byMode.get(s.display.compare ? "surrogate" : s.mode);
    if (!primary) return;
    const { nx, ny } = primary.fields;
    const temperature = primary.fields.channels.get("temperature");
    if (!temperature) {
      this.showError("response carries no temperature channel", false);
      return;
    }
    const lo = s.display.colormapMin;
    const hi = s.display.colormapMax;

    const main = this.ctx("main");
    const mapped = drawTemperature(main, temperature, nx, ny, lo, hi);
    if (s.display.showGlyphs) {
      const qx = primary.fields.channels.get("qx");
      const qy = primary.fields.channels.get("qy");
      if (qx && qy) drawGlyphs(main, velocityGlyphs(qx, qy, nx, ny), nx, ny);
    }
    if (s.display.showLahmOutline) {
      const lahm = this.cache.byMode.get("lahm");
      const lt = lahm?.fields.channels.get("temperature");
      if (lt) drawOutline(main, contourSegments(lt, nx, ny, OUTLINE_LEVEL), nx, ny);
    }
    drawWellMarker(main, s.well.i, s.well.j, nx, ny);

    let compareNote = "";
    if (s.display.compare) {
      const truth = this.cache.byMode.get("simulate");
      const tt = truth?.fields.channels.get("temperature");
      if (tt) {
        drawTemperature(this.ctx("truth"), tt, nx, ny, lo, hi);
        const diff = signedDifference(temperature, tt);
        let worst = 0;
        for (const v of diff) worst = Math.max(worst, Math.abs(v));
        // symmetric scale, at least 0.5 K so small errors stay visible
        drawError(this.ctx("error"), diff, nx, ny, Math.max(0.5, worst));
        compareNote = ` | max |surrogate - simulate| ${worst.toFixed(2)} K`;
      }
    }
    this.setCanvasRowVisible(s.display.compare);

    const maxT = maxValue(temperature);
    const flag = mapped.outOfRange ? " [out of colormap range]" : "";
    this.readout.textContent =
      `max plume temperature ${maxT.toFixed(2)} degC${flag}` +
      ` | service ${primary.provenance.timing_ms.toFixed(1)} ms` +
      ` | round trip ${primary.roundTripMs} ms` +
      ` | mode ${primary.provenance.mode}${compareNote}`;
    this.status.textContent = "";
  }

  private showError(message: string, retryable: boolean): void {
    this.status.textContent = "";
    this.errorBox.innerHTML = "";
    this.errorBox.appendChild(document.createTextNode(message));
    if (retryable) {
      const retry = document.createElement("button");
      retry.textContent = "retry";
      retry.addEventListener("click", () => this.refresh());
      this.errorBox.appendChild(retry);
    }
  }

  // --- DOM scaffolding ---

  private ctx(name: string): CanvasRenderingContext2D {
    return this.canvases[name].getContext("2d")!;
  }

  private setCanvasRowVisible(compare: boolean): void {
    for (const name of ["truth", "error"]) {
      this.canvases[name].style.display = compare ? "" : "none";
    }
  }

  private buildCanvasRow(): HTMLElement {
    const row = el("div", "canvas-row");
    for (const name of ["main", "truth", "error"]) {
      const canvas = document.createElement("canvas");
      canvas.width = 512;
      canvas.height = 512;
      canvas.className = `field-canvas field-${name}`;
      if (name === "main") {
        canvas.addEventListener("click", (ev) => {
          const rect = canvas.getBoundingClientRect();
          const i = Math.floor(((ev.clientX - rect.left) / rect.width) * GRID_CELLS);
          const j = Math.floor((1 - (ev.clientY - rect.top) / rect.height) * GRID_CELLS);
          this.moveWell(
            Math.min(GRID_CELLS - 1, Math.max(0, i)),
            Math.min(GRID_CELLS - 1, Math.max(0, j)));
        });
      }
      this.canvases[name] = canvas;
      row.appendChild(canvas);
    }
    return row;
  }

  private buildControls(): HTMLElement {
    const bar = el("div", "controls");

    const modeSel = document.createElement("select");
    for (const m of ["surrogate", "simulate", "lahm"]) {
      const opt = document.createElement("option");
      opt.value = m;
      opt.textContent = m;
      modeSel.appendChild(opt);
    }
    modeSel.addEventListener("change", () => this.update({ mode: modeSel.value as Mode }));
    bar.appendChild(labeled("mode", modeSel));

    const sizeSel = document.createElement("select");
    for (const s of CONTROL_GRID_SIZES) {
      const opt = document.createElement("option");
      opt.value = String(s);
      opt.textContent = `${s} x ${s}`;
      sizeSel.appendChild(opt);
    }
    sizeSel.addEventListener("change", () => this.setControlGridSize(Number(sizeSel.value)));
    bar.appendChild(labeled("control grid", sizeSel));

    const permSlider = document.createElement("input");
    permSlider.type = "range";
    permSlider.min = String(PERM_MIN);
    permSlider.max = String(PERM_MAX);
    permSlider.step = String((PERM_MAX - PERM_MIN) / 100);
    permSlider.addEventListener("input", () => {
      const v = Number(permSlider.value);
      this.update({ controlValues: this.scenario.controlValues.map(() => v) });
    });
    bar.appendChild(labeled("uniform permeability", permSlider));

    const angle = document.createElement("input");
    angle.type = "range";
    angle.min = "0";
    angle.max = "360";
    angle.value = "0";
    const magnitude = document.createElement("input");
    magnitude.type = "range";
    magnitude.min = "0";
    magnitude.max = String(GRADIENT_LIMIT);
    magnitude.value = "120";
    const dial = () => this.setGradientDial(Number(angle.value), Number(magnitude.value));
    angle.addEventListener("input", dial);
    magnitude.addEventListener("input", dial);
    bar.appendChild(labeled("gradient angle", angle));
    bar.appendChild(labeled("gradient magnitude", magnitude));

    for (const [label, key] of [
      ["velocity glyphs", "showGlyphs"],
      ["analytic outline", "showLahmOutline"],
      ["compare", "compare"],
    ] as const) {
      const box = document.createElement("input");
      box.type = "checkbox";
      box.checked = this.scenario.display[key];
      box.addEventListener("change", () => {
        this.update({ display: { ...this.scenario.display, [key]: box.checked } });
      });
      bar.appendChild(labeled(label, box));
    }

    const exportBtn = document.createElement("button");
    exportBtn.textContent = "export JSON";
    exportBtn.addEventListener("click", () => {
      const blob = new Blob([this.exportScenario()], { type: "application/json" });
      const a = document.createElement("a");
      a.href = URL.createObjectURL(blob);
      a.download = "scenario.json";
      a.click();
      URL.revokeObjectURL(a.href);
    });
    bar.appendChild(exportBtn);

    const importInput = document.createElement("input");
    importInput.type = "file";
    importInput.accept = "application/json";
    importInput.addEventListener("change", async () => {
      const file = importInput.files?.[0];
      if (!file) return;
      try {
        this.importScenario(await file.text());
      } catch (err) {
        this.showError(`import failed: ${(err as Error).message}`, false);
      }
    });
    bar.appendChild(labeled("import", importInput));

    return bar;
  }
}

function el(tag: string, className: string): HTMLElement {
  const node = document.createElement(tag);
  node.className = className;
  return node;
}

function labeled(text: string, control: HTMLElement): HTMLElement {
  const wrap = el("label", "control");
  const span = document.createElement("span");
  span.textContent = text;
  wrap.append(span, control);
  return wrap;
}

function describeError(err: unknown): string {
  if (err instanceof ApiError) {
    return `service error ${err.status} (${err.code}): ${err.message}`;
  }
  return `request failed: ${(err as Error).message ?? String(err)}`;
}
