/** Response document shapes from the /api/v1 service, field for field. */

export const TARGETS = ["runtime_s", "node_power_w", "cpu_power_w", "mem_power_w"] as const;
export type Target = (typeof TARGETS)[number];

export interface DatasetSummary {
  id: string;
  n_samples: number;
  columns: string[];
  counters: string[];
  targets: string[];
}

export type JobState = "pending" | "ready" | "failed";

export interface TrainingFitDoc {
  r2: number;
  rmse: number;
}

export interface FittedModelDoc {
  target: Target;
  freq_term: string;
  selected_counters: string[];
  coefficients: Record<string, number>;
  intercept: number;
  freq_coefficient: number;
  training_fit: TrainingFitDoc;
  non_unique: boolean;
}

export interface SelectionDoc {
  relevance_threshold: number;
  variance_target: number;
  max_counters: number;
  relevance: Record<string, number>;
  passed_relevance: string[];
  pca: {
    columns: string[];
    dropped: string[];
    n_retained: number;
    explained_variance_ratio: number[];
  };
}

export interface ModelSetDoc {
  format: string;
  version: number;
  targets: Target[];
  models: Record<Target, FittedModelDoc>;
  selection: Record<Target, SelectionDoc>;
}

export interface ModelSummary {
  model_id: string;
  state: JobState;
  summary?: Record<Target, { selected_counters: string[]; r2: number; rmse: number }>;
  error?: string;
}

export interface ModelDoc {
  model_id: string;
  state: JobState;
  model?: ModelSetDoc;
  error?: string;
}

export interface MetricOutcomeDoc {
  baseline_prediction: number;
  perturbed_prediction: number;
  improvement_percent: number | null;
}

export interface WhatIfOutcomeDoc {
  pivot_counter: string;
  delta_percent: number;
  propagation_tau: number;
  deltas: Record<string, number>;
  metrics: Record<Target, MetricOutcomeDoc>;
}

export interface PredictionRow {
  [target: string]: { prediction: number; error_percent: number | null };
}

export interface PredictResponse {
  model_id: string;
  predictions: PredictionRow[];
}

export interface DensityDoc {
  grid: number[];
  density: number[];
  bandwidth: number;
  quartiles: { q1: number; median: number; q3: number };
  min: number;
  max: number;
}

export interface CellDoc {
  method: string;
  target: Target;
  error: string | null;
  hyperparams: Record<string, number | string> | null;
  n_test: number;
  errors_percent: number[];
  pairs: [number, number][];
  mean: number | null;
  min: number | null;
  max: number | null;
  quartiles: { q1: number; median: number; q3: number } | null;
  density: DensityDoc | null;
  importance: { feature: string; sse_reduction: number }[] | null;
  model: FittedModelDoc | null;
}

export interface RankingEntryDoc {
  counter: string;
  score: number;
  share: number;
}

export interface RankingsDoc {
  entries: RankingEntryDoc[];
  freq_score: number;
  all_zero: boolean;
}

export interface ReportDoc {
  format: string;
  version: number;
  dataset_id: string;
  split: {
    test_fraction: number;
    seed: number;
    train_indices: number[];
    test_indices: number[];
  };
  methods: string[];
  targets: Target[];
  cells: Record<string, Record<Target, CellDoc>>;
  rankings: Record<Target, RankingsDoc | null>;
}

export interface ReportEnvelope {
  report_id: string;
  state: JobState;
  report?: ReportDoc;
  error?: string;
}

export interface ApiErrorDetail {
  field: string;
  message: string;
}
