"""Counter selection and nonnegative regression models for the four metrics.

Each metric (runtime and node/CPU/memory power) gets its own linear model
over a small set of selected counters plus a frequency-derived regressor:
1/f for runtime, f^3 for the power metrics. Counter and frequency
coefficients are constrained nonnegative; the intercept is free.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .dataset import FREQ_TERMS, TARGET_NAMES, CounterSample, Dataset, freq_regressor
from .errors import (
    DomainError,
    ModelFitError,
    NumericError,
    SchemaError,
    SelectionEmptyError,
    StateError,
    UnderdeterminedError,
    UnknownColumnError,
    ValidationError,
)
from .nnls import kkt_violation, nnls_with_intercept
from .stats import CorrelationMatrix, PcaResult, pca, spearman, spearman_matrix

KKT_TOL = 1e-8

MODEL_JSON_FORMAT = "perfmodel-modelset"
MODEL_JSON_VERSION = 1


def freq_term_for(target: str) -> str:
    """Frequency regressor shape by metric: 1/f for runtime, f^3 for power."""
    return "inverse" if target == "runtime_s" else "cubed"


@dataclass(frozen=True)
class SelectionParams:
    """Thresholds controlling counter selection."""

    relevance_threshold: float = 0.5
    variance_target: float = 0.9
    max_counters: int = 12

    def __post_init__(self):
        if not 0.0 <= self.relevance_threshold <= 1.0:
            raise ValidationError(
                f"relevance_threshold must be in [0, 1], got {self.relevance_threshold}"
            )
        if not 0.0 < self.variance_target <= 1.0:
            raise ValidationError(
                f"variance_target must be in (0, 1], got {self.variance_target}"
            )
        if self.max_counters < 1:
            raise ValidationError(f"max_counters must be positive, got {self.max_counters}")


@dataclass(frozen=True)
class TrainingFit:
    r2: float
    rmse: float


@dataclass(frozen=True)
class FittedModel:
    """One metric's linear model over selected counters plus the frequency term."""

    target: str
    selected_counters: tuple[str, ...]
    coefficients: tuple[float, ...]
    intercept: float
    freq_coefficient: float
    freq_term: str
    training_fit: TrainingFit
    non_unique: bool = False

    def __post_init__(self):
        if self.target not in TARGET_NAMES:
            raise ValidationError(f"unknown target {self.target!r}")
        if self.freq_term not in FREQ_TERMS:
            raise ValidationError(f"unknown freq_term {self.freq_term!r}")
        expected = freq_term_for(self.target)
        if self.freq_term != expected:
            raise ValidationError(
                f"target {self.target!r} requires freq_term {expected!r}, got {self.freq_term!r}"
            )
        if len(self.coefficients) != len(self.selected_counters):
            raise ValidationError("one coefficient per selected counter required")
        for name, c in zip(self.selected_counters, self.coefficients):
            if c < 0:
                raise ValidationError(f"coefficient for {name!r} is negative: {c}")
        if self.freq_coefficient < 0:
            raise ValidationError(f"freq_coefficient is negative: {self.freq_coefficient}")


@dataclass(frozen=True)
class SelectionArtifacts:
    """What selection saw for one target: relevance correlations and the PCA."""

    target: str
    params: SelectionParams
    relevance: Mapping[str, float | None]  # counter -> spearman with target (None = undefined)
    passed_relevance: tuple[str, ...]
    pca: PcaResult


@dataclass(frozen=True)
class ModelSet:
    """The four fitted metric models plus the selection context.

    counter_correlations holds the pairwise counter correlation matrix from
    training (used by what-if propagation); it is not part of the JSON
    serialization and is None on deserialized sets.
    """

    models: Mapping[str, FittedModel]
    selection: Mapping[str, SelectionArtifacts] = field(default_factory=dict)
    counter_correlations: CorrelationMatrix | None = None

    def __post_init__(self):
        if tuple(sorted(self.models)) != tuple(sorted(TARGET_NAMES)):
            raise ValidationError(
                f"a model set needs exactly the targets {list(TARGET_NAMES)}, "
                f"got {sorted(self.models)}"
            )
        for t, m in self.models.items():
            if m.target != t:
                raise ValidationError(f"model under key {t!r} targets {m.target!r}")

    def __getitem__(self, target: str) -> FittedModel:
        return self.models[target]

    @property
    def all_selected_counters(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for t in TARGET_NAMES:
            for c in self.models[t].selected_counters:
                seen.setdefault(c, None)
        return tuple(seen)


def select_counters(train: Dataset, target: str, params: SelectionParams) -> tuple[str, ...]:
    """Pick the major counters for one metric.

    Step 1 keeps counters whose |spearman| with the target reaches the
    relevance threshold (undefined correlations are excluded). Step 2 runs
    PCA over the kept counters and takes, per retained component, the
    counter with the largest absolute loading not already chosen. Step 3
    truncates to max_counters, ordered by |spearman| descending. All ties
    break by counter-name lexicographic order, so selection is deterministic.
    """
    if not train.normalized:
        raise StateError("counter selection requires a normalized dataset")
    if target not in train.target_names:
        raise UnknownColumnError(f"unknown target {target!r}")
    n_counters = len(train.counter_names)
    recommended = max(8, n_counters / 4)
    if train.n < recommended:
        warnings.warn(
            f"only {train.n} samples for {n_counters} counters; "
            f"selection is unreliable below {math.ceil(recommended)}"
        )

    y = train.column(target)
    rho: dict[str, float] = {}
    for c in train.counter_names:
        r = spearman(train.column(c), y)
        if not math.isnan(r):
            rho[c] = r
    kept = [c for c in train.counter_names if abs(rho.get(c, 0.0)) >= params.relevance_threshold]
    if not kept:
        raise SelectionEmptyError(
            f"no counter reaches |rho| >= {params.relevance_threshold} with {target!r}; "
            "lower the relevance threshold"
        )

    decomposition = pca(train, kept, params.variance_target)
    chosen: list[str] = []
    for k in range(decomposition.n_retained):
        loadings = decomposition.components[k]
        order = sorted(
            range(len(decomposition.columns)),
            key=lambda i: (-abs(loadings[i]), decomposition.columns[i]),
        )
        for i in order:
            name = decomposition.columns[i]
            if name not in chosen:
                chosen.append(name)
                break

    chosen.sort(key=lambda c: (-abs(rho[c]), c))
    return tuple(chosen[: params.max_counters])


def _design(train: Dataset, counters: Sequence[str], freq_term: str) -> np.ndarray:
    cols = [train.column(c) for c in counters]
    cols.append(freq_regressor(train.freq(), freq_term))
    return np.column_stack(cols)


def fit(train: Dataset, target: str, counters: Sequence[str], freq_term: str) -> FittedModel:
    """Nonnegative least squares for one metric over the given counters.

    Minimizes squared error with counter and frequency coefficients >= 0 and
    a free intercept; the result is checked against the optimality (KKT)
    conditions at 1e-8 relative tolerance. A rank-deficient design still
    fits but is flagged non-unique.
    """
    counters = tuple(counters)
    if not counters:
        raise ValidationError("need at least one counter to fit")
    if train.n < len(counters) + 2:
        raise UnderdeterminedError(
            f"{train.n} samples cannot determine {len(counters)} counters + "
            "frequency + intercept; need at least counters + 2"
        )
    a = _design(train, counters, freq_term)
    y = train.column(target)
    coefs, intercept, non_unique = nnls_with_intercept(a, y)
    viol = kkt_violation(a - a.mean(axis=0), y - y.mean(), coefs)
    if viol > KKT_TOL:
        raise NumericError(f"NNLS optimality violated: relative residual {viol:.3e}")
    pred = intercept + a @ coefs
    resid = y - pred
    sse = float(resid @ resid)
    sst = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - sse / sst if sst > 0 else (1.0 if sse <= 1e-30 else 0.0)
    rmse = math.sqrt(sse / train.n)
    return FittedModel(
        target=target,
        selected_counters=counters,
        coefficients=tuple(float(c) for c in coefs[:-1]),
        intercept=intercept,
        freq_coefficient=float(coefs[-1]),
        freq_term=freq_term,
        training_fit=TrainingFit(r2=r2, rmse=rmse),
        non_unique=non_unique,
    )


def fit_all(train: Dataset, params: SelectionParams | None = None) -> ModelSet:
    """Select counters and fit all four metric models independently.

    Failures carry the metric identity via ModelFitError. The pairwise
    counter correlation matrix is computed once and attached for what-if use.
    """
    params = params or SelectionParams()
    if not train.normalized:
        raise StateError("fitting requires a normalized dataset")
    models: dict[str, FittedModel] = {}
    artifacts: dict[str, SelectionArtifacts] = {}
    for target in TARGET_NAMES:
        try:
            selected = select_counters(train, target, params)
            model = fit(train, target, selected, freq_term_for(target))
            y = train.column(target)
            relevance = {}
            for c in train.counter_names:
                r = spearman(train.column(c), y)
                relevance[c] = None if math.isnan(r) else r
            passed = tuple(
                c
                for c in train.counter_names
                if relevance[c] is not None and abs(relevance[c]) >= params.relevance_threshold
            )
            artifacts[target] = SelectionArtifacts(
                target=target,
                params=params,
                relevance=relevance,
                passed_relevance=passed,
                pca=pca(train, passed, params.variance_target),
            )
        except Exception as e:
            raise ModelFitError(target, e) from e
        models[target] = model
    corr = spearman_matrix(train, train.counter_names)
    return ModelSet(models=models, selection=artifacts, counter_correlations=corr)


def predict(m: FittedModel, sample: CounterSample) -> float:
    """Model prediction for one (normalized) sample."""
    if sample.cpu_freq_ghz <= 0:
        raise DomainError(f"cpu_freq_ghz must be positive, got {sample.cpu_freq_ghz}")
    total = m.intercept
    for name, coef in zip(m.selected_counters, m.coefficients):
        if name not in sample.counters:
            raise UnknownColumnError(f"sample is missing selected counter {name!r}")
        total += coef * sample.counters[name]
    total += m.freq_coefficient * freq_regressor(sample.cpu_freq_ghz, m.freq_term)
    return float(total)


def predict_dataset(m: FittedModel, d: Dataset) -> np.ndarray:
    """Vectorized predict over every sample of a dataset."""
    missing = [c for c in m.selected_counters if c not in d.counter_names]
    if missing:
        raise UnknownColumnError(f"dataset is missing selected counter(s) {missing}")
    a = _design(d, m.selected_counters, m.freq_term)
    coefs = np.array(list(m.coefficients) + [m.freq_coefficient])
    return m.intercept + a @ coefs


def error_rate(prediction: float, baseline: float) -> float:
    """Signed percent error: (prediction - baseline) / baseline * 100."""
    if baseline == 0:
        raise DomainError("baseline is zero; error rate undefined")
    return (prediction - baseline) / baseline * 100.0


@dataclass(frozen=True)
class RankEntry:
    counter: str
    score: float
    share: float


@dataclass(frozen=True)
class ModelRanking:
    target: str
    entries: tuple[RankEntry, ...]
    freq_score: float
    all_zero: bool


@dataclass(frozen=True)
class CounterRanking:
    """Per-model counter contributions, largest first."""

    models: Mapping[str, ModelRanking]

    def to_dict(self) -> dict:
        return {
            t: {
                "entries": [
                    {"counter": e.counter, "score": e.score, "share": e.share}
                    for e in r.entries
                ],
                "freq_score": r.freq_score,
                "all_zero": r.all_zero,
            }
            for t, r in self.models.items()
        }


def rank_model(m: FittedModel, train: Dataset) -> ModelRanking:
    """Counter contributions for one model, largest first.

    score(counter) = coefficient * mean(counter over train); shares normalize
    scores to 1. The frequency term's contribution is reported separately and
    excluded from the shares. All-zero scores yield an empty ranking flagged
    all_zero. Ties order by counter name.
    """
    scores = []
    for name, coef in zip(m.selected_counters, m.coefficients):
        scores.append((name, coef * float(train.column(name).mean())))
    total = sum(s for _, s in scores)
    freq_score = m.freq_coefficient * float(
        freq_regressor(train.freq(), m.freq_term).mean()
    )
    if total <= 0.0:
        return ModelRanking(m.target, (), freq_score, all_zero=True)
    entries = tuple(
        RankEntry(name, s, s / total)
        for name, s in sorted(scores, key=lambda p: (-p[1], p[0]))
    )
    return ModelRanking(m.target, entries, freq_score, all_zero=False)


def rank_counters(ms: ModelSet, train: Dataset) -> CounterRanking:
    """Rank every model's counters by mean additive contribution."""
    return CounterRanking(
        models={t: rank_model(ms.models[t], train) for t in TARGET_NAMES}
    )


def model_set_to_dict(ms: ModelSet) -> dict:
    """Versioned JSON-ready document for a model set.

    Carries the four models plus selection metadata (relevance correlations
    and PCA shape), not the full matrices.
    """
    doc: dict = {
        "format": MODEL_JSON_FORMAT,
        "version": MODEL_JSON_VERSION,
        "targets": list(TARGET_NAMES),
        "models": {},
        "selection": {},
    }
    for t in TARGET_NAMES:
        m = ms.models[t]
        doc["models"][t] = {
            "target": m.target,
            "freq_term": m.freq_term,
            "selected_counters": list(m.selected_counters),
            "coefficients": {c: v for c, v in zip(m.selected_counters, m.coefficients)},
            "intercept": m.intercept,
            "freq_coefficient": m.freq_coefficient,
            "training_fit": {"r2": m.training_fit.r2, "rmse": m.training_fit.rmse},
            "non_unique": m.non_unique,
        }
    for t, art in ms.selection.items():
        doc["selection"][t] = {
            "relevance_threshold": art.params.relevance_threshold,
            "variance_target": art.params.variance_target,
            "max_counters": art.params.max_counters,
            "relevance": dict(art.relevance),
            "passed_relevance": list(art.passed_relevance),
            "pca": {
                "columns": list(art.pca.columns),
                "dropped": list(art.pca.dropped),
                "n_retained": art.pca.n_retained,
                "explained_variance_ratio": [float(v) for v in art.pca.explained_variance_ratio],
            },
        }
    return doc


def model_set_from_dict(doc: Mapping) -> ModelSet:
    """Rebuild a ModelSet from its JSON document (selection kept as metadata only)."""
    if doc.get("format") != MODEL_JSON_FORMAT:
        raise SchemaError(f"not a model-set document: format={doc.get('format')!r}")
    if doc.get("version") != MODEL_JSON_VERSION:
        raise SchemaError(f"unsupported model-set version {doc.get('version')!r}")
    models: dict[str, FittedModel] = {}
    for t, m in doc["models"].items():
        counters = tuple(m["selected_counters"])
        models[t] = FittedModel(
            target=m["target"],
            selected_counters=counters,
            coefficients=tuple(float(m["coefficients"][c]) for c in counters),
            intercept=float(m["intercept"]),
            freq_coefficient=float(m["freq_coefficient"]),
            freq_term=m["freq_term"],
            training_fit=TrainingFit(
                r2=float(m["training_fit"]["r2"]), rmse=float(m["training_fit"]["rmse"])
            ),
            non_unique=bool(m.get("non_unique", False)),
        )
    return ModelSet(models=models, selection={}, counter_correlations=None)


def save_model_set(ms: ModelSet, path: str | Path) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_set_to_dict(ms), fh, indent=2)
        fh.write("\n")
    return path


def load_model_set(path: str | Path) -> ModelSet:
    with open(path, encoding="utf-8") as fh:
        return model_set_from_dict(json.load(fh))
