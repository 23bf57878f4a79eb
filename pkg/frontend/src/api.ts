/** Thin typed client for the /api/v1 endpoints; no statistics, just transport. */

import type {
  ApiErrorDetail,
  DatasetSummary,
  ModelDoc,
  ModelSummary,
  PredictResponse,
  ReportEnvelope,
  WhatIfOutcomeDoc,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly details: ApiErrorDetail[],
  ) {
    super(details.map((d) => (d.field ? `${d.field}: ${d.message}` : d.message)).join("; "));
    this.name = "ApiError";
  }
}

async function parseError(resp: Response): Promise<never> {
  let details: ApiErrorDetail[] = [{ field: "", message: `HTTP ${resp.status}` }];
  try {
    const body = (await resp.json()) as { detail?: ApiErrorDetail[] };
    if (Array.isArray(body.detail)) details = body.detail;
  } catch {
    // non-JSON error body: keep the status-line message
  }
  throw new ApiError(resp.status, details);
}

export interface FitParams {
  relevance_threshold?: number;
  variance_target?: number;
  max_counters?: number;
}

export interface WhatIfRequest {
  model_id: string;
  dataset_id: string;
  counter: string;
  delta_percent: number;
  tau?: number;
}

export interface CompareRequest {
  dataset_id: string;
  methods?: string[];
  seed?: number;
  test_fraction?: number;
  folds?: number;
}

export class Client {
  constructor(readonly base: string = "/api/v1") {}

  private async send<T>(path: string, init: RequestInit, signal?: AbortSignal): Promise<T> {
    const resp = await fetch(this.base + path, { ...init, signal });
    if (!resp.ok) await parseError(resp);
    return (await resp.json()) as T;
  }

  async health(signal?: AbortSignal): Promise<boolean> {
    const resp = await fetch(this.base + "/health", { signal });
    return resp.ok;
  }

  uploadDataset(csvText: string, signal?: AbortSignal): Promise<DatasetSummary> {
    return this.send("/datasets", { method: "POST", body: csvText }, signal);
  }

  fitModel(datasetId: string, params?: FitParams, signal?: AbortSignal): Promise<ModelSummary> {
    const body: Record<string, unknown> = { dataset_id: datasetId };
    if (params) body.params = params;
    return this.send(
      "/models",
      { method: "POST", headers: { "content-type": "application/json" }, body: JSON.stringify(body) },
      signal,
    );
  }

  getModel(modelId: string, signal?: AbortSignal): Promise<ModelDoc> {
    return this.send(`/models/${encodeURIComponent(modelId)}`, {}, signal);
  }

  predict(
    modelId: string,
    samples: { counters: Record<string, number>; cpu_freq_ghz: number; targets?: Record<string, number> }[],
    signal?: AbortSignal,
  ): Promise<PredictResponse> {
    return this.send(
      "/predict",
      {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ model_id: modelId, samples }),
      },
      signal,
    );
  }

  whatif(req: WhatIfRequest, signal?: AbortSignal): Promise<WhatIfOutcomeDoc> {
    return this.send(
      "/whatif",
      { method: "POST", headers: { "content-type": "application/json" }, body: JSON.stringify(req) },
      signal,
    );
  }

  compare(req: CompareRequest, signal?: AbortSignal): Promise<ReportEnvelope> {
    return this.send(
      "/compare",
      { method: "POST", headers: { "content-type": "application/json" }, body: JSON.stringify(req) },
      signal,
    );
  }

  getReport(reportId: string, signal?: AbortSignal): Promise<ReportEnvelope> {
    return this.send(`/reports/${encodeURIComponent(reportId)}`, {}, signal);
  }
}

const POLL_MS = 250;

function sleep(ms: number, signal?: AbortSignal): Promise<void> {
  return new Promise((resolve, reject) => {
    const t = setTimeout(resolve, ms);
    signal?.addEventListener("abort", () => {
      clearTimeout(t);
      reject(new DOMException("aborted", "AbortError"));
    });
  });
}

/** Poll a pending fit until the service reports ready or failed. */
export async function waitForModel(
  client: Client,
  modelId: string,
  signal?: AbortSignal,
): Promise<ModelDoc> {
  for (;;) {
    const doc = await client.getModel(modelId, signal);
    if (doc.state !== "pending") return doc;
    await sleep(POLL_MS, signal);
  }
}

/** Poll a pending comparison until its report lands. */
export async function waitForReport(
  client: Client,
  reportId: string,
  signal?: AbortSignal,
): Promise<ReportEnvelope> {
  for (;;) {
    const doc = await client.getReport(reportId, signal);
    if (doc.state !== "pending") return doc;
    await sleep(POLL_MS, signal);
  }
}
