/** Canned API documents used by the mocked-fetch tests. */

import type {
  CellDoc,
  ModelSetDoc,
  ReportDoc,
  Target,
  WhatIfOutcomeDoc,
} from "../src/types.js";

const TARGET_LIST: Target[] = ["runtime_s", "node_power_w", "cpu_power_w", "mem_power_w"];

function fittedModel(target: Target, intercept: number, freqCoef: number, freqTerm: string) {
  return {
    target,
    freq_term: freqTerm,
    selected_counters: ["c01", "c02"],
    coefficients: { c01: 6.0, c02: 5.5 },
    intercept,
    freq_coefficient: freqCoef,
    training_fit: { r2: 0.99931, rmse: 0.04213 },
    non_unique: false,
  };
}

function selection() {
  return {
    relevance_threshold: 0.5,
    variance_target: 0.9,
    max_counters: 12,
    relevance: { c01: 0.667, c02: 0.641 },
    passed_relevance: ["c01", "c02"],
    pca: {
      columns: ["c01", "c02"],
      dropped: [],
      n_retained: 2,
      explained_variance_ratio: [0.58, 0.42],
    },
  };
}

export const modelSetFixture: ModelSetDoc = {
  format: "perfmodel-modelset",
  version: 1,
  targets: TARGET_LIST,
  models: {
    runtime_s: fittedModel("runtime_s", 50.0, 6.0, "inverse"),
    node_power_w: fittedModel("node_power_w", 200.0, 0.3, "cubed"),
    cpu_power_w: fittedModel("cpu_power_w", 120.0, 0.25, "cubed"),
    mem_power_w: fittedModel("mem_power_w", 80.0, 0.1, "cubed"),
  },
  selection: {
    runtime_s: selection(),
    node_power_w: selection(),
    cpu_power_w: selection(),
    mem_power_w: selection(),
  },
};

function outcome(delta: number, improvements: Record<Target, number>): WhatIfOutcomeDoc {
  const metrics = {} as WhatIfOutcomeDoc["metrics"];
  for (const t of TARGET_LIST) {
    const base = { runtime_s: 55.2, node_power_w: 203.4, cpu_power_w: 121.9, mem_power_w: 81.3 }[t];
    metrics[t] = {
      baseline_prediction: base,
      perturbed_prediction: base * (1 - improvements[t] / 100),
      improvement_percent: improvements[t],
    };
  }
  return {
    pivot_counter: "c01",
    delta_percent: delta,
    propagation_tau: 0.7,
    deltas: delta === 0 ? { c01: 0 } : { c01: delta, c02: delta * 0.81 },
    metrics,
  };
}

export const whatifZeroFixture = outcome(0, {
  runtime_s: 0,
  node_power_w: 0,
  cpu_power_w: 0,
  mem_power_w: 0,
});

export const whatifCutFixture = outcome(-30, {
  runtime_s: 9.3157,
  node_power_w: 1.0482,
  cpu_power_w: 1.77391,
  mem_power_w: 2.625,
});

function cell(target: Target): CellDoc {
  return {
    method: "counter_model",
    target,
    error: null,
    hyperparams: null,
    n_test: 16,
    errors_percent: [-0.61, -0.22, 0.05, 0.3, 0.72],
    pairs: [
      [54.9, 55.23],
      [61.2, 61.33],
    ],
    mean: 0.048,
    min: -0.61,
    max: 0.72,
    quartiles: { q1: -0.22, median: 0.05, q3: 0.3 },
    density: {
      grid: [-1.0, -0.5, 0.0, 0.5, 1.0],
      density: [0.08, 0.31, 0.57, 0.29, 0.07],
      bandwidth: 0.21,
      quartiles: { q1: -0.22, median: 0.05, q3: 0.3 },
      min: -0.61,
      max: 0.72,
    },
    importance: null,
    model: null,
  };
}

export const reportFixture: ReportDoc = {
  format: "perfmodel-comparison-report",
  version: 1,
  dataset_id: "fixture-ds",
  split: {
    test_fraction: 0.2,
    seed: 7,
    train_indices: Array.from({ length: 64 }, (_, i) => i),
    test_indices: Array.from({ length: 16 }, (_, i) => 64 + i),
  },
  methods: ["counter_model"],
  targets: TARGET_LIST,
  cells: {
    counter_model: {
      runtime_s: cell("runtime_s"),
      node_power_w: cell("node_power_w"),
      cpu_power_w: cell("cpu_power_w"),
      mem_power_w: cell("mem_power_w"),
    },
  },
  rankings: {
    runtime_s: {
      entries: [
        { counter: "c01", score: 3.1, share: 0.608 },
        { counter: "c02", score: 2.0, share: 0.392 },
      ],
      freq_score: 1.52,
      all_zero: false,
    },
    node_power_w: null,
    cpu_power_w: null,
    mem_power_w: null,
  },
};

export function jsonResponse(doc: unknown, status = 200): Response {
  return new Response(JSON.stringify(doc), {
    status,
    headers: { "content-type": "application/json" },
  });
}
