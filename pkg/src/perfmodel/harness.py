"""Experiment orchestration: one split, many methods, one report.

Every requested method sees the identical train/test partition. Failures are
contained per (method, target) cell so one singular fit cannot empty the
whole report. Reports serialize to deterministic JSON: no timestamps, fixed
key order, and repr-exact floats, so identical inputs and seeds produce
byte-identical files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from . import baselines
from .baselines import TREE_METHODS
from .dataset import TARGET_NAMES, Dataset, SplitSpec, ensure_normalized, split_indices
from .errors import DegenerateInputError, DimensionError, InputError, PerfModelError
from .model import (
    SelectionParams,
    error_rate,
    fit,
    freq_term_for,
    predict_dataset,
    rank_model,
    select_counters,
)
from .stats import kde

COUNTER_MODEL = "counter_model"
VALID_METHODS = (COUNTER_MODEL,) + baselines.METHODS

REPORT_JSON_FORMAT = "perfmodel-comparison-report"
REPORT_JSON_VERSION = 1


@dataclass(frozen=True)
class CellResult:
    """One method on one target: per-sample errors and their distribution."""

    method: str
    target: str
    error: str | None = None
    hyperparams: Mapping | None = None
    errors_percent: tuple[float, ...] = ()
    pairs: tuple[tuple[float, float], ...] = ()  # (prediction, actual)
    mean: float | None = None
    min: float | None = None
    max: float | None = None
    quartiles: Mapping[str, float] | None = None
    density: Mapping | None = None
    importance: tuple[Mapping, ...] | None = None
    model: Mapping | None = None

    @property
    def failed(self) -> bool:
        return self.error is not None

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "target": self.target,
            "error": self.error,
            "hyperparams": dict(self.hyperparams) if self.hyperparams is not None else None,
            "n_test": len(self.errors_percent) if not self.failed else 0,
            "errors_percent": list(self.errors_percent),
            "pairs": [[p, a] for p, a in self.pairs],
            "mean": self.mean,
            "min": self.min,
            "max": self.max,
            "quartiles": dict(self.quartiles) if self.quartiles is not None else None,
            "density": dict(self.density) if self.density is not None else None,
            "importance": [dict(e) for e in self.importance] if self.importance is not None else None,
            "model": dict(self.model) if self.model is not None else None,
        }


@dataclass(frozen=True)
class ComparisonReport:
    dataset_id: str
    split_spec: SplitSpec
    train_indices: tuple[int, ...]
    test_indices: tuple[int, ...]
    methods: tuple[str, ...]
    targets: tuple[str, ...]
    cells: Mapping[str, Mapping[str, CellResult]]  # method -> target -> cell
    rankings: Mapping[str, Mapping | None] = field(default_factory=dict)

    def cell(self, method: str, target: str) -> CellResult:
        return self.cells[method][target]

    def to_dict(self) -> dict:
        return {
            "format": REPORT_JSON_FORMAT,
            "version": REPORT_JSON_VERSION,
            "dataset_id": self.dataset_id,
            "split": {
                "test_fraction": self.split_spec.test_fraction,
                "seed": self.split_spec.seed,
                "train_indices": list(self.train_indices),
                "test_indices": list(self.test_indices),
            },
            "methods": list(self.methods),
            "targets": list(self.targets),
            "cells": {
                m: {t: self.cells[m][t].to_dict() for t in self.targets}
                for m in self.methods
            },
            "rankings": {
                t: dict(r) if r is not None else None for t, r in self.rankings.items()
            },
        }


def _distribution(errs: np.ndarray) -> dict:
    q1, median, q3 = (float(q) for q in np.percentile(errs, [25, 50, 75]))
    try:
        density = kde(errs).to_dict()
    except (DegenerateInputError, DimensionError):
        density = {"point_mass": float(errs[0])}
    return {
        "mean": float(np.mean(errs)),
        "min": float(np.min(errs)),
        "max": float(np.max(errs)),
        "quartiles": {"q1": q1, "median": median, "q3": q3},
        "density": density,
    }


def _error_cell(method: str, target: str, e: Exception) -> CellResult:
    return CellResult(method=method, target=target, error=f"{type(e).__name__}: {e}")


def run_comparison(
    d: Dataset,
    spec: SplitSpec | None = None,
    methods: Sequence[str] | None = None,
    targets: Sequence[str] | None = None,
    params: SelectionParams | None = None,
    grids: Mapping[str, Sequence[Mapping]] | None = None,
    folds: int = 3,
    dataset_id: str = "dataset",
) -> ComparisonReport:
    """Fit every requested method on one shared split and collect error rates.

    Baselines are tuned by cross-validation on the training side only, then
    refitted on the full training set; the counter model is selected and fit
    per target. Per-sample signed error rates come from the test side only.
    """
    spec = spec or SplitSpec()
    params = params or SelectionParams()
    methods = tuple(methods) if methods is not None else VALID_METHODS
    targets = tuple(targets) if targets is not None else TARGET_NAMES
    if not methods:
        raise InputError("methods list is empty")
    bad = [m for m in methods if m not in VALID_METHODS]
    if bad:
        raise InputError(
            f"unknown method(s) {bad}; valid methods: {', '.join(VALID_METHODS)}"
        )
    if not targets:
        raise InputError("targets list is empty")
    bad_t = [t for t in targets if t not in TARGET_NAMES]
    if bad_t:
        raise InputError(f"unknown target(s) {bad_t}; valid targets: {', '.join(TARGET_NAMES)}")

    d = ensure_normalized(d)
    train_idx, test_idx = split_indices(d.n, spec)
    train, test = d.subset(train_idx), d.subset(test_idx)
    all_grids = dict(baselines.default_grids())
    if grids:
        all_grids.update({m: list(g) for m, g in grids.items()})

    cells: dict[str, dict[str, CellResult]] = {}
    rankings: dict[str, Mapping | None] = {}

    for method in methods:
        cells[method] = {}
        for target in targets:
            try:
                if method == COUNTER_MODEL:
                    cells[method][target] = _counter_model_cell(
                        train, test, target, params, rankings
                    )
                else:
                    cells[method][target] = _baseline_cell(
                        method, train, test, target, all_grids[method], folds, spec.seed
                    )
            except Exception as e:
                cells[method][target] = _error_cell(method, target, e)
                if method == COUNTER_MODEL:
                    rankings[target] = None

    if all(cells[m][t].failed for m in methods for t in targets):
        raise PerfModelError("every method/target cell failed; see per-cell errors")

    return ComparisonReport(
        dataset_id=dataset_id,
        split_spec=spec,
        train_indices=tuple(int(i) for i in train_idx),
        test_indices=tuple(int(i) for i in test_idx),
        methods=methods,
        targets=targets,
        cells=cells,
        rankings={t: rankings.get(t) for t in targets},
    )


def _test_errors(preds: np.ndarray, actual: np.ndarray) -> tuple[np.ndarray, tuple]:
    errs = np.array([error_rate(float(p), float(a)) for p, a in zip(preds, actual)])
    pairs = tuple((float(p), float(a)) for p, a in zip(preds, actual))
    return errs, pairs


def _counter_model_cell(
    train: Dataset,
    test: Dataset,
    target: str,
    params: SelectionParams,
    rankings: dict,
) -> CellResult:
    selected = select_counters(train, target, params)
    model = fit(train, target, selected, freq_term_for(target))
    preds = predict_dataset(model, test)
    actual = test.column(target)
    errs, pairs = _test_errors(preds, actual)
    ranking = rank_model(model, train)
    rankings[target] = {
        "entries": [
            {"counter": e.counter, "score": e.score, "share": e.share}
            for e in ranking.entries
        ],
        "freq_score": ranking.freq_score,
        "all_zero": ranking.all_zero,
    }
    dist = _distribution(errs)
    return CellResult(
        method=COUNTER_MODEL,
        target=target,
        hyperparams={
            "relevance_threshold": params.relevance_threshold,
            "variance_target": params.variance_target,
            "max_counters": params.max_counters,
        },
        errors_percent=tuple(float(e) for e in errs),
        pairs=pairs,
        model={
            "selected_counters": list(model.selected_counters),
            "coefficients": {c: v for c, v in zip(model.selected_counters, model.coefficients)},
            "intercept": model.intercept,
            "freq_coefficient": model.freq_coefficient,
            "freq_term": model.freq_term,
            "training_fit": {"r2": model.training_fit.r2, "rmse": model.training_fit.rmse},
            "non_unique": model.non_unique,
        },
        **dist,
    )


def _baseline_cell(
    method: str,
    train: Dataset,
    test: Dataset,
    target: str,
    grid: Sequence[Mapping],
    folds: int,
    seed: int,
) -> CellResult:
    features = baselines.default_features(train)
    best = baselines.tune(method, train, target, features, grid, folds=folds, seed=seed)
    if method in TREE_METHODS and "seed" in best:
        best = {**best, "seed": seed}
    model = baselines.fit_baseline(method, train, target, features, best)
    preds = baselines.predict_baseline_dataset(model, test)
    actual = test.column(target)
    errs, pairs = _test_errors(preds, actual)
    imp = None
    if method in TREE_METHODS:
        imp = tuple(baselines.importance(model, train).to_list())
    dist = _distribution(errs)
    return CellResult(
        method=method,
        target=target,
        hyperparams=best,
        errors_percent=tuple(float(e) for e in errs),
        pairs=pairs,
        importance=imp,
        **dist,
    )


def export_report(r: ComparisonReport, fmt: str, out_dir: str | Path) -> list[Path]:
    """Write the report: json -> report.json; csv -> errors.csv + summary.csv.

    errors.csv is long form (method, target, sample_index, error_percent);
    summary.csv has one row per non-failed cell with mean/quartiles/extremes.
    """
    if not r.methods:
        raise InputError("report has no methods; nothing to export")
    if fmt not in ("json", "csv"):
        raise InputError(f"unknown export format {fmt!r}; use json or csv")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if fmt == "json":
        path = out_dir / "report.json"
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(r.to_dict(), fh, indent=2)
            fh.write("\n")
        return [path]

    errors_path = out_dir / "errors.csv"
    with open(errors_path, "w", encoding="utf-8", newline="") as fh:
        fh.write("method,target,sample_index,error_percent\n")
        for m in r.methods:
            for t in r.targets:
                cell = r.cells[m][t]
                if cell.failed:
                    continue
                for i, e in enumerate(cell.errors_percent):
                    fh.write(f"{m},{t},{i},{e!r}\n")
    summary_path = out_dir / "summary.csv"
    with open(summary_path, "w", encoding="utf-8", newline="") as fh:
        fh.write("method,target,mean,q1,median,q3,min,max\n")
        for m in r.methods:
            for t in r.targets:
                cell = r.cells[m][t]
                if cell.failed:
                    continue
                q = cell.quartiles
                fh.write(
                    f"{m},{t},{cell.mean!r},{q['q1']!r},{q['median']!r},"
                    f"{q['q3']!r},{cell.min!r},{cell.max!r}\n"
                )
    return [errors_path, summary_path]
