/** Session state shared across views. History is append-only on purpose:
 * the explorer's value is comparing a new perturbation against earlier ones.
 */

import type { ModelSetDoc, ReportDoc, WhatIfOutcomeDoc } from "./types.js";

export type ViewName = "whatif" | "dashboard" | "comparison";

export interface ScenarioForm {
  counter: string;
  deltaPercent: number;
  tau: number;
}

export interface HistoryEntry {
  seq: number;
  outcome: WhatIfOutcomeDoc;
}

export interface UiState {
  view: ViewName;
  datasetId: string | null;
  modelId: string | null;
  modelReady: boolean;
  model: ModelSetDoc | null;
  report: ReportDoc | null;
  form: ScenarioForm;
  history: HistoryEntry[];
}

export function createState(): UiState {
  return {
    view: "whatif",
    datasetId: null,
    modelId: null,
    modelReady: false,
    model: null,
    report: null,
    form: { counter: "", deltaPercent: -10, tau: 0.7 },
    history: [],
  };
}

export function canSubmitScenario(state: UiState): boolean {
  return state.modelReady && state.datasetId !== null && state.form.counter !== "";
}

export function appendHistory(state: UiState, outcome: WhatIfOutcomeDoc): HistoryEntry {
  const entry = { seq: state.history.length + 1, outcome };
  state.history.push(entry);
  return entry;
}

/** Counters for the scenario picker, best first.
 *
 * Preference order: comparison-report rankings for the target (already sorted
 * by share, server side), then the fitted model's counters ordered by their
 * served coefficient. Ordering keys are response fields either way; nothing
 * is recomputed for display.
 */
export function rankedCounters(state: UiState, target = "runtime_s"): string[] {
  const ranking = state.report?.rankings?.[target as keyof ReportDoc["rankings"]];
  if (ranking && !ranking.all_zero && ranking.entries.length > 0) {
    return ranking.entries.map((e) => e.counter);
  }
  if (!state.model) return [];
  const best = new Map<string, number>();
  for (const t of state.model.targets) {
    const m = state.model.models[t];
    for (const c of m.selected_counters) {
      const coef = m.coefficients[c] ?? 0;
      if (!best.has(c) || coef > (best.get(c) as number)) best.set(c, coef);
    }
  }
  return [...best.entries()].sort((a, b) => b[1] - a[1] || a[0].localeCompare(b[0])).map(([c]) => c);
}
