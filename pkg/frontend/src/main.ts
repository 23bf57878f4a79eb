/** App shell: dataset upload, model fit, comparison launch, view switching.
 * Each navigation aborts the previous view's in-flight requests; session
 * state (including scenario history) survives the switch.
 */

import { ApiError, Client, waitForModel, waitForReport } from "./api.js";
import { clear, el } from "./dom.js";
import { createState } from "./state.js";
import type { UiState, ViewName } from "./state.js";
import { renderComparison } from "./views/comparison.js";
import { renderDashboard } from "./views/dashboard.js";
import { renderWhatIf } from "./views/whatif.js";

const state: UiState = createState();
const client = new Client();
let inflight: AbortController | null = null;

function status(message: string, isError = false): void {
  const node = document.getElementById("status");
  if (!node) return;
  node.textContent = message;
  node.classList.toggle("error-note", isError);
}

function freshSignal(): AbortSignal {
  inflight?.abort();
  inflight = new AbortController();
  return inflight.signal;
}

function renderActiveView(): void {
  const root = document.getElementById("view");
  if (!root) return;
  if (state.view === "whatif") renderWhatIf(root, { state, client });
  else if (state.view === "dashboard") renderDashboard(root, state);
  else renderComparison(root, state);
  for (const btn of document.querySelectorAll("nav button[data-view]")) {
    btn.classList.toggle("active", btn.getAttribute("data-view") === state.view);
  }
}

function switchView(view: ViewName): void {
  inflight?.abort(); // cancel requests the outgoing view still has running
  inflight = null;
  state.view = view;
  renderActiveView();
}

async function onUpload(file: File): Promise<void> {
  try {
    status(`uploading ${file.name}...`);
    const summary = await client.uploadDataset(await file.text(), freshSignal());
    state.datasetId = summary.id;
    state.modelId = null;
    state.modelReady = false;
    state.model = null;
    state.report = null;
    status(`dataset ${summary.id}: ${summary.n_samples} samples, ${summary.counters.length} counters`);
    renderActiveView();
  } catch (err) {
    status(err instanceof ApiError ? err.message : String(err), true);
  }
}

async function onFit(): Promise<void> {
  if (!state.datasetId) {
    status("upload a dataset first", true);
    return;
  }
  try {
    status("fitting models...");
    const signal = freshSignal();
    const summary = await client.fitModel(state.datasetId, undefined, signal);
    if (summary.state === "failed") throw new Error(summary.error ?? "fit failed");
    const doc = await waitForModel(client, summary.model_id, signal);
    if (doc.state !== "ready" || !doc.model) throw new Error(doc.error ?? "fit failed");
    state.modelId = doc.model_id;
    state.model = doc.model;
    state.modelReady = true;
    status(`model ${doc.model_id} ready`);
    renderActiveView();
  } catch (err) {
    if ((err as Error).name === "AbortError") return;
    status(err instanceof ApiError ? err.message : String(err), true);
  }
}

async function onCompare(): Promise<void> {
  if (!state.datasetId) {
    status("upload a dataset first", true);
    return;
  }
  try {
    status("running comparison (this can take a little while)...");
    const signal = freshSignal();
    const launched = await client.compare({ dataset_id: state.datasetId, seed: 0 }, signal);
    if (launched.state === "failed") throw new Error(launched.error ?? "comparison failed");
    const done = await waitForReport(client, launched.report_id, signal);
    if (done.state !== "ready" || !done.report) throw new Error(done.error ?? "comparison failed");
    state.report = done.report;
    status(`report ${done.report_id} ready`);
    renderActiveView();
  } catch (err) {
    if ((err as Error).name === "AbortError") return;
    status(err instanceof ApiError ? err.message : String(err), true);
  }
}

export function boot(): void {
  const nav = document.querySelector("nav");
  if (nav) {
    clear(nav);
    for (const view of ["whatif", "dashboard", "comparison"] as const) {
      nav.append(
        el("button", { type: "button", "data-view": view, onclick: () => switchView(view) }, [view]),
      );
    }
  }
  const upload = document.getElementById("dataset-file") as HTMLInputElement | null;
  upload?.addEventListener("change", () => {
    const file = upload.files?.[0];
    if (file) void onUpload(file);
  });
  document.getElementById("fit-button")?.addEventListener("click", () => void onFit());
  document.getElementById("compare-button")?.addEventListener("click", () => void onCompare());
  renderActiveView();
}

if (typeof document !== "undefined" && document.getElementById("view")) {
  boot();
}
