/** What-if explorer: pick a counter, size the perturbation, read the four
 * predicted improvements. Every submission lands in an append-only history so
 * the next perturbation can be chosen against earlier outcomes.
 */

import { ApiError, Client } from "../api.js";
import { clear, el, pctCell, numCell, fmtPct } from "../dom.js";
import { appendHistory, canSubmitScenario, rankedCounters } from "../state.js";
import type { UiState } from "../state.js";
import { TARGETS } from "../types.js";
import type { WhatIfOutcomeDoc } from "../types.js";

export interface ViewContext {
  state: UiState;
  client: Client;
}

const METRIC_LABELS: Record<string, string> = {
  runtime_s: "runtime (s)",
  node_power_w: "node power (W)",
  cpu_power_w: "CPU power (W)",
  mem_power_w: "memory power (W)",
};

function outcomeTable(outcome: WhatIfOutcomeDoc): HTMLElement {
  const head = el("tr", {}, [
    el("th", {}, ["metric"]),
    el("th", {}, ["baseline"]),
    el("th", {}, ["perturbed"]),
    el("th", {}, ["improvement"]),
  ]);
  const body = TARGETS.map((t) => {
    const m = outcome.metrics[t];
    const row = el("tr", { "data-metric": t }, [el("td", {}, [METRIC_LABELS[t] ?? t])]);
    row.append(numCell(m.baseline_prediction), numCell(m.perturbed_prediction));
    const imp = pctCell(m.improvement_percent);
    imp.classList.add("improvement");
    row.append(imp);
    return row;
  });
  return el("table", { class: "metrics" }, [head, ...body]);
}

function deltasTable(outcome: WhatIfOutcomeDoc): HTMLElement {
  const rows = Object.entries(outcome.deltas).map(([counter, pct]) =>
    el("tr", { "data-counter": counter }, [
      el("td", {}, [counter]),
      el("td", { class: "num", title: String(pct) }, [fmtPct(pct)]),
    ]),
  );
  return el("table", { class: "deltas" }, [
    el("tr", {}, [el("th", {}, ["counter"]), el("th", {}, ["applied delta"])]),
    ...rows,
  ]);
}

function historyItem(seq: number, outcome: WhatIfOutcomeDoc): HTMLElement {
  const parts = TARGETS.map((t) => {
    const v = outcome.metrics[t].improvement_percent;
    return `${METRIC_LABELS[t] ?? t}: ${v === null ? "n/a" : fmtPct(v)}`;
  });
  return el("li", { class: "history-entry", "data-seq": seq }, [
    el("span", { class: "history-head" }, [
      `#${seq} ${outcome.pivot_counter} ${fmtPct(outcome.delta_percent)} (tau ${outcome.propagation_tau})`,
    ]),
    el("span", { class: "history-improvements" }, [parts.join("  ")]),
  ]);
}

export function renderWhatIf(root: HTMLElement, ctx: ViewContext): void {
  const { state, client } = ctx;
  clear(root);

  const counters = rankedCounters(state);
  if (state.form.counter === "" && counters.length > 0) state.form.counter = counters[0];

  const counterSelect = el("select", { id: "whatif-counter" });
  for (const c of counters) {
    const opt = el("option", { value: c }, [c]);
    if (c === state.form.counter) opt.setAttribute("selected", "");
    counterSelect.append(opt);
  }
  counterSelect.addEventListener("change", () => {
    state.form.counter = counterSelect.value;
  });

  const slider = el("input", {
    id: "whatif-delta",
    type: "range",
    min: -90,
    max: 100,
    step: 1,
    value: state.form.deltaPercent,
  });
  const deltaNumber = el("input", {
    id: "whatif-delta-number",
    type: "number",
    min: -99,
    max: 500,
    step: 1,
    value: state.form.deltaPercent,
  });
  slider.addEventListener("input", () => {
    deltaNumber.value = slider.value;
    state.form.deltaPercent = Number(slider.value);
  });
  deltaNumber.addEventListener("input", () => {
    slider.value = deltaNumber.value;
    state.form.deltaPercent = Number(deltaNumber.value);
  });

  const tauInput = el("input", {
    id: "whatif-tau",
    type: "number",
    min: 0.05,
    max: 1,
    step: 0.05,
    value: state.form.tau,
  });
  tauInput.addEventListener("input", () => {
    state.form.tau = Number(tauInput.value);
  });

  const submit = el("button", { id: "whatif-submit", type: "submit" }, ["evaluate scenario"]);
  if (!canSubmitScenario(state)) submit.setAttribute("disabled", "");

  const errorBox = el("div", { id: "whatif-error", class: "error-note", hidden: true });
  const resultBox = el("div", { id: "whatif-result" });
  const historyList = el("ul", { id: "whatif-history" });
  for (const entry of state.history) historyList.append(historyItem(entry.seq, entry.outcome));

  const form = el("form", { id: "whatif-form" }, [
    el("label", { for: "whatif-counter" }, ["counter"]),
    counterSelect,
    el("label", { for: "whatif-delta" }, ["delta %"]),
    slider,
    deltaNumber,
    el("label", { for: "whatif-tau" }, ["propagation tau"]),
    tauInput,
    submit,
  ]);

  form.addEventListener("submit", (ev) => {
    ev.preventDefault();
    void submitScenario();
  });

  async function submitScenario(): Promise<void> {
    if (!canSubmitScenario(state) || !state.modelId || !state.datasetId) return;
    submit.setAttribute("disabled", "");
    errorBox.hidden = true;
    try {
      const outcome = await client.whatif({
        model_id: state.modelId,
        dataset_id: state.datasetId,
        counter: state.form.counter,
        delta_percent: state.form.deltaPercent,
        tau: state.form.tau,
      });
      const entry = appendHistory(state, outcome);
      clear(resultBox);
      resultBox.append(
        el("h3", {}, [`scenario #${entry.seq}: ${outcome.pivot_counter} ${fmtPct(outcome.delta_percent)}`]),
        outcomeTable(outcome),
        el("h4", {}, ["propagated counter changes"]),
        deltasTable(outcome),
      );
      historyList.append(historyItem(entry.seq, outcome));
    } catch (err) {
      // form state stays untouched so the user can correct and resubmit
      errorBox.textContent = err instanceof ApiError ? err.message : String(err);
      errorBox.hidden = false;
    } finally {
      if (canSubmitScenario(state)) submit.removeAttribute("disabled");
    }
  }

  root.append(el("h2", {}, ["what-if explorer"]));
  if (!state.modelReady) {
    root.append(
      el("p", { class: "placeholder" }, ["upload a dataset and fit a model to explore scenarios"]),
    );
  }
  root.append(form, errorBox, resultBox, el("h3", {}, ["history"]), historyList);
}
