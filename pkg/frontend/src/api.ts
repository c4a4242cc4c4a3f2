// Thin HTTP client for the inference service. Keeps transport concerns
// (encoding, error envelopes, latency measurement) out of the app logic.

import { decodeBase64, decodeContainer, FieldContainer } from "./container.js";
import { FieldResponse, Provenance, ScenarioRequest, ServiceError } from "./types.js";

export class ApiError extends Error {
  readonly code: string;
  readonly status: number;
  readonly retryable: boolean;

  constructor(status: number, code: string, message: string) {
    super(message);
    this.code = code;
    this.status = status;
    // 429 (simulation slot busy) and 5xx are worth a retry; 4xx means the
    // scenario itself needs fixing first.
    this.retryable = status === 429 || status >= 500;
  }
}

export interface PredictionResult {
  fields: FieldContainer;
  provenance: Provenance;
  grid: FieldResponse["grid"];
  roundTripMs: number; // wall clock around the fetch, includes network
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ServiceClient {
  private readonly base: string;
  private readonly fetchImpl: FetchLike;

  constructor(baseUrl = "", fetchImpl?: FetchLike) {
    this.base = baseUrl.replace(/\/$/, "");
    this.fetchImpl = fetchImpl ?? ((input, init) => fetch(input, init));
  }

  async health(): Promise<{ status: string; model_loaded: boolean }> {
    const resp = await this.fetchImpl(`${this.base}/v1/health`);
    return this.json(resp);
  }

  async modelInfo(): Promise<Record<string, unknown>> {
    const resp = await this.fetchImpl(`${this.base}/v1/model`);
    return this.json(resp);
  }

  async predict(req: ScenarioRequest): Promise<PredictionResult> {
    const t0 = Date.now();
    const resp = await this.fetchImpl(`${this.base}/v1/predict`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(req),
    });
    const doc: FieldResponse = await this.json(resp);
    const fields = decodeContainer(decodeBase64(doc.container_b64));
    return {
      fields,
      provenance: doc.provenance,
      grid: doc.grid,
      roundTripMs: Date.now() - t0,
    };
  }

  private async json<T>(resp: Response): Promise<T> {
    if (resp.ok) {
      return resp.json() as Promise<T>;
    }
    let code = "http_error";
    let message = `${resp.status} ${resp.statusText}`;
    try {
      const body = (await resp.json()) as ServiceError;
      if (body && body.error) {
        code = body.error.code ?? code;
        message = body.error.message ?? message;
      }
    } catch {
      // non-JSON error body, keep the status line
    }
    throw new ApiError(resp.status, code, message);
  }
}
