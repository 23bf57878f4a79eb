"""Shared fixtures: planted synthetic datasets with known structure."""

from __future__ import annotations

import numpy as np
import pytest

from perfmodel.dataset import (
    Dataset,
    CounterSample,
    SynthSpec,
    ensure_normalized,
    synth_generate,
)

# Four-metric planted recipe: runtime uses 1/f, powers use f^3, all with the
# same two relevant counters. Coefficients keep each counter's rank
# correlation with every target comfortably above the 0.5 selection default.
PLANTED_KWARGS = dict(
    n_counters=10,
    true_coefficients={"c01": 6.0, "c02": 6.0},
    intercept=50.0,
    freq_coefficient=6.0,
    freq_term="inverse",
    per_target={
        "node_power_w": {"intercept": 200.0, "freq_coefficient": 0.3, "freq_term": "cubed"},
        "cpu_power_w": {"intercept": 120.0, "freq_coefficient": 0.25, "freq_term": "cubed"},
        "mem_power_w": {"intercept": 80.0, "freq_coefficient": 0.1, "freq_term": "cubed"},
    },
)


def planted_spec(n_samples: int = 144, noise_sigma: float = 0.01, seed: int = 42) -> SynthSpec:
    return SynthSpec(n_samples=n_samples, noise_sigma=noise_sigma, seed=seed, **PLANTED_KWARGS)


@pytest.fixture(scope="session")
def planted_dataset() -> Dataset:
    """144 samples, sigma=0.01, normalized."""
    return ensure_normalized(synth_generate(planted_spec()))


@pytest.fixture(scope="session")
def planted_noiseless() -> Dataset:
    """60 samples, sigma=0, normalized; model fits should be exact."""
    return ensure_normalized(synth_generate(planted_spec(n_samples=60, noise_sigma=0.0)))


def make_planted_sample(f: float) -> CounterSample:
    """A probe point for the planted models: every counter at 0.5, frequency f."""
    return CounterSample(
        app_name="a",
        system_name="s",
        num_cores=1,
        config_params={},
        cpu_freq_ghz=float(f),
        counters={f"c{i:02d}": 0.5 for i in range(1, 11)},
        targets={},
    )


def make_dataset(
    counters: dict[str, np.ndarray],
    targets: dict[str, np.ndarray],
    freq: np.ndarray,
    normalized: bool = True,
) -> Dataset:
    """Hand-build a dataset from column arrays (no CSV, no synth)."""
    names = tuple(counters)
    tnames = tuple(targets)
    n = len(freq)
    samples = []
    for i in range(n):
        samples.append(
            CounterSample(
                app_name="test",
                system_name="test",
                num_cores=1,
                config_params={},
                cpu_freq_ghz=float(freq[i]),
                counters={c: float(v[i]) for c, v in counters.items()},
                targets={t: float(v[i]) for t, v in targets.items()},
            )
        )
    return Dataset(tuple(samples), names, tnames, normalized=normalized)
