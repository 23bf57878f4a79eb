/** Model dashboard: per-target coefficients, fit quality, and importance
 * shares, all straight from the served model/report documents. Bars scale a
 * served number for display; the numbers printed are the served values.
 */

import { clear, el, numCell } from "../dom.js";
import type { UiState } from "../state.js";
import type { FittedModelDoc, ModelSetDoc, RankingsDoc } from "../types.js";

function bar(label: string, value: number, maxValue: number, cls: string): HTMLElement {
  const width = maxValue > 0 ? Math.max(1, (value / maxValue) * 100) : 1;
  return el("div", { class: `bar-row ${cls}` }, [
    el("span", { class: "bar-label" }, [label]),
    el("div", { class: "bar-track" }, [
      el("div", { class: "bar-fill", style: `width:${width.toFixed(1)}%` }),
    ]),
    el("span", { class: "bar-value", title: String(value) }, [value.toFixed(4)]),
  ]);
}

function modelCard(target: string, m: FittedModelDoc): HTMLElement {
  const coefs = m.selected_counters.map((c) => [c, m.coefficients[c] ?? 0] as const);
  const maxCoef = Math.max(...coefs.map(([, v]) => v), m.freq_coefficient);

  const statsRow = el("tr", {}, [el("td", {}, ["intercept"])]);
  statsRow.append(numCell(m.intercept));
  const freqRow = el("tr", {}, [el("td", {}, [`frequency term (${m.freq_term})`])]);
  freqRow.append(numCell(m.freq_coefficient));
  const fitRow = el("tr", {}, [el("td", {}, ["R2 / RMSE"])]);
  fitRow.append(
    numCell(m.training_fit.r2),
    numCell(m.training_fit.rmse),
  );

  const card = el("section", { class: "model-card", "data-target": target }, [
    el("h3", {}, [target]),
    el("table", { class: "model-stats" }, [statsRow, freqRow, fitRow]),
    el("h4", {}, ["counter coefficients"]),
    ...coefs.map(([c, v]) => bar(c, v, maxCoef, "coef")),
  ]);
  if (m.non_unique) {
    card.append(el("p", { class: "warn-note" }, ["coefficients are not unique for this training set"]));
  }
  return card;
}

function rankingCard(target: string, ranking: RankingsDoc): HTMLElement {
  const card = el("section", { class: "ranking-card", "data-target": target }, [
    el("h4", {}, [`${target} counter importance`]),
  ]);
  if (ranking.all_zero) {
    card.append(el("p", { class: "placeholder" }, ["all contribution scores are zero"]));
    return card;
  }
  for (const entry of ranking.entries) {
    const row = bar(entry.counter, entry.share * 100, 100, "share");
    row.setAttribute("data-share", String(entry.share));
    const value = row.querySelector(".bar-value") as HTMLElement;
    value.textContent = `${(entry.share * 100).toFixed(1)}%`;
    value.title = String(entry.share);
    card.append(row);
  }
  return card;
}

function selectionSummary(model: ModelSetDoc): HTMLElement {
  const first = model.selection[model.targets[0]];
  return el("p", { class: "selection-summary" }, [
    `selection: |rho| >= ${first.relevance_threshold}, variance target ${first.variance_target}, ` +
      `cap ${first.max_counters}; ${first.pca.n_retained} retained component(s)`,
  ]);
}

export function renderDashboard(root: HTMLElement, state: UiState): void {
  clear(root);
  root.append(el("h2", {}, ["model dashboard"]));
  if (!state.model) {
    root.append(el("p", { class: "placeholder" }, ["no fitted model yet"]));
    return;
  }
  root.append(selectionSummary(state.model));
  for (const target of state.model.targets) {
    root.append(modelCard(target, state.model.models[target]));
    const ranking = state.report?.rankings?.[target];
    if (ranking) root.append(rankingCard(target, ranking));
  }
}
