"""Hypothetical counter-optimization outcomes under the fitted models.

A scenario reduces (or raises) one pivot counter by a percentage; strongly
correlated counters move along with it, scaled by their correlation. The
four metric models then predict the before/after values over a baseline
sample set, giving theoretical improvement percentages.
"""

from __future__ import annotations

import dataclasses
import warnings
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .dataset import TARGET_NAMES, Dataset
from .errors import InputError, StateError, ValidationError
from .model import ModelSet, predict_dataset
from .stats import CorrelationMatrix


@dataclass(frozen=True)
class WhatIfScenario:
    """One hypothetical optimization: pivot counter, size, propagation rule.

    delta_percent is the relative change applied to the pivot (-30 means
    "reduce by 30%"); counters whose |correlation| with the pivot reaches
    propagation_tau move by delta_percent * rho. baseline holds the samples
    the models are averaged over.
    """

    pivot_counter: str
    delta_percent: float
    baseline: Dataset
    propagation_tau: float = 0.7

    def __post_init__(self):
        if not self.delta_percent > -100.0:
            raise ValidationError(
                f"delta_percent must be > -100, got {self.delta_percent}"
            )
        if not 0.0 < self.propagation_tau <= 1.0:
            raise ValidationError(
                f"propagation_tau must be in (0, 1], got {self.propagation_tau}"
            )


@dataclass(frozen=True)
class MetricOutcome:
    baseline_prediction: float
    perturbed_prediction: float
    improvement_percent: float | None


@dataclass(frozen=True)
class WhatIfOutcome:
    """Applied per-counter deltas plus per-metric before/after predictions."""

    pivot_counter: str
    delta_percent: float
    propagation_tau: float
    deltas: Mapping[str, float]
    metrics: Mapping[str, MetricOutcome]

    def to_dict(self) -> dict:
        return {
            "pivot_counter": self.pivot_counter,
            "delta_percent": self.delta_percent,
            "propagation_tau": self.propagation_tau,
            "deltas": dict(self.deltas),
            "metrics": {
                t: {
                    "baseline_prediction": o.baseline_prediction,
                    "perturbed_prediction": o.perturbed_prediction,
                    "improvement_percent": o.improvement_percent,
                }
                for t, o in self.metrics.items()
            },
        }


def propagate(scenario: WhatIfScenario, corr: CorrelationMatrix) -> dict[str, float]:
    """Per-counter delta map implied by the scenario.

    The pivot gets delta_percent; every other counter j with a defined
    |rho(pivot, j)| >= propagation_tau gets delta_percent * rho(pivot, j);
    all remaining counters get 0.
    """
    p = corr.index(scenario.pivot_counter)
    deltas: dict[str, float] = {}
    for j, name in enumerate(corr.names):
        if j == p:
            deltas[name] = scenario.delta_percent
        elif corr.defined[p, j] and abs(corr.rho[p, j]) >= scenario.propagation_tau:
            deltas[name] = scenario.delta_percent * float(corr.rho[p, j])
        else:
            deltas[name] = 0.0
    return deltas


def perturb_dataset(d: Dataset, deltas: Mapping[str, float]) -> Dataset:
    """Apply multiplicative counter deltas: counter' = counter * (1 + delta/100).

    Results are clamped at 0 (counters are nonnegative rates); counters
    absent from the delta map and the frequency are untouched.
    """
    factors = {c: max(0.0, 1.0 + pct / 100.0) for c, pct in deltas.items()}
    samples = []
    for s in d.samples:
        counters = {
            c: v * factors[c] if c in factors else v for c, v in s.counters.items()
        }
        samples.append(dataclasses.replace(s, counters=counters))
    return Dataset(tuple(samples), d.counter_names, d.target_names, d.normalized)


def evaluate(ms: ModelSet, scenario: WhatIfScenario, corr: CorrelationMatrix) -> WhatIfOutcome:
    """Predicted improvement of each metric under the scenario.

    Baseline prediction = mean model prediction over the baseline samples;
    perturbed prediction = same after applying the propagated deltas. The
    improvement (baseline - perturbed) / baseline * 100 is positive when the
    metric shrinks. One delta map drives all four models. A nonpositive
    baseline prediction makes the percentage meaningless; it is reported as
    None with a warning.
    """
    if scenario.baseline.n == 0:
        raise InputError("baseline sample set is empty")
    if not scenario.baseline.normalized:
        raise StateError("what-if evaluation requires normalized baseline samples")
    deltas = propagate(scenario, corr)
    perturbed = perturb_dataset(scenario.baseline, deltas)
    metrics: dict[str, MetricOutcome] = {}
    for target in TARGET_NAMES:
        m = ms.models[target]
        base = float(np.mean(predict_dataset(m, scenario.baseline)))
        pert = float(np.mean(predict_dataset(m, perturbed)))
        if base <= 0.0:
            warnings.warn(
                f"baseline prediction for {target!r} is {base:.6g} (<= 0); "
                "improvement undefined"
            )
            improvement = None
        else:
            improvement = (base - pert) / base * 100.0
        metrics[target] = MetricOutcome(base, pert, improvement)
    return WhatIfOutcome(
        pivot_counter=scenario.pivot_counter,
        delta_percent=scenario.delta_percent,
        propagation_tau=scenario.propagation_tau,
        deltas=deltas,
        metrics=metrics,
    )
