"""Counter datasets: CSV ingest, validation, normalization, splitting, synthesis.

A dataset is an ordered, immutable collection of per-run samples. Every sample
carries configuration metadata, a map of hardware event counts keyed by
counter name, the CPU frequency in GHz, and up to four measured metrics
(runtime and node/CPU/memory power). Column identity is always by name, never
by position.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    DomainError,
    EmptyDataError,
    ParseError,
    SchemaError,
    SplitError,
    StateError,
    UnknownColumnError,
    ValidationError,
)

TARGET_NAMES = ("runtime_s", "node_power_w", "cpu_power_w", "mem_power_w")
NORMALIZER = "TOT_CYC"
FREQ_COLUMN = "cpu_freq_ghz"
CONFIG_PREFIX = "config_"
_META_COLUMNS = ("app", "system", "cores", "freq_ghz")

# frequency levels used by the synthetic generator (GHz)
SYNTH_FREQ_CHOICES = (1.2, 1.5, 1.8, 2.1, 2.3)

FREQ_TERMS = ("inverse", "cubed")


def freq_regressor(freq_ghz: np.ndarray | float, freq_term: str):
    """The frequency-derived model regressor: 1/f or f^3 (f in GHz)."""
    if freq_term == "inverse":
        return 1.0 / freq_ghz
    if freq_term == "cubed":
        return freq_ghz**3
    raise ValidationError(f"unknown freq_term {freq_term!r}; expected one of {FREQ_TERMS}")


@dataclass(frozen=True)
class CounterSample:
    """One application run: metadata, counters, frequency, measured metrics."""

    app_name: str
    system_name: str
    num_cores: int
    config_params: Mapping[str, float]
    cpu_freq_ghz: float
    counters: Mapping[str, float]
    targets: Mapping[str, float]

    def __post_init__(self):
        if self.num_cores <= 0:
            raise DomainError(f"num_cores must be positive, got {self.num_cores}")
        if not self.cpu_freq_ghz > 0:
            raise DomainError(f"cpu_freq_ghz must be positive, got {self.cpu_freq_ghz}")
        for name, value in self.counters.items():
            if value < 0:
                raise DomainError(f"counter {name!r} is negative: {value}")
        tc = self.counters.get(NORMALIZER)
        if tc is not None and not tc > 0:
            raise DomainError(f"{NORMALIZER} must be positive, got {tc}")
        for name, value in self.targets.items():
            if name not in TARGET_NAMES:
                raise UnknownColumnError(f"unknown target {name!r}")
            if not value > 0:
                raise DomainError(f"target {name!r} must be positive, got {value}")


@dataclass(frozen=True)
class Dataset:
    """Ordered collection of samples with a declared counter column set.

    Immutable after construction; all operations return new datasets.
    """

    samples: tuple[CounterSample, ...]
    counter_names: tuple[str, ...]
    target_names: tuple[str, ...] = TARGET_NAMES
    normalized: bool = False

    def __post_init__(self):
        object.__setattr__(self, "samples", tuple(self.samples))
        object.__setattr__(self, "counter_names", tuple(self.counter_names))
        object.__setattr__(self, "target_names", tuple(self.target_names))
        if len(set(self.counter_names)) != len(self.counter_names):
            raise SchemaError("counter names must be unique")
        cset = set(self.counter_names)
        tset = set(self.target_names)
        for i, s in enumerate(self.samples):
            if set(s.counters) != cset:
                raise SchemaError(
                    f"sample {i} counters {sorted(s.counters)} do not match "
                    f"declared counter_names {sorted(cset)}"
                )
            if set(s.targets) != tset:
                raise SchemaError(
                    f"sample {i} targets {sorted(s.targets)} do not match "
                    f"declared target_names {sorted(tset)}"
                )

    @property
    def n(self) -> int:
        return len(self.samples)

    def column(self, name: str) -> np.ndarray:
        """Column vector by name: counter, target, cpu_freq_ghz, or config key."""
        if name in self.counter_names:
            return np.array([s.counters[name] for s in self.samples], dtype=np.float64)
        if name in self.target_names:
            return np.array([s.targets[name] for s in self.samples], dtype=np.float64)
        if name == FREQ_COLUMN:
            return np.array([s.cpu_freq_ghz for s in self.samples], dtype=np.float64)
        if self.samples and name in self.samples[0].config_params:
            return np.array(
                [s.config_params[name] for s in self.samples], dtype=np.float64
            )
        raise UnknownColumnError(f"unknown column {name!r}")

    def matrix(self, names: Sequence[str]) -> np.ndarray:
        """Samples-by-columns matrix for the named columns, in the given order."""
        if len(names) == 0:
            return np.zeros((self.n, 0), dtype=np.float64)
        return np.column_stack([self.column(n) for n in names])

    def counter_matrix(self) -> np.ndarray:
        return self.matrix(self.counter_names)

    def freq(self) -> np.ndarray:
        return self.column(FREQ_COLUMN)

    def subset(self, indices: Iterable[int]) -> "Dataset":
        samples = tuple(self.samples[i] for i in indices)
        return Dataset(samples, self.counter_names, self.target_names, self.normalized)


@dataclass(frozen=True)
class SplitSpec:
    """Deterministic train/test split: fraction held out, PRNG seed."""

    test_fraction: float = 0.2
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.test_fraction < 1.0:
            raise ValidationError(
                f"test_fraction must be in (0, 1), got {self.test_fraction}"
            )
        if not 0 <= int(self.seed) < 2**64:
            raise ValidationError("seed must be an unsigned 64-bit integer")


@dataclass(frozen=True)
class CsvSchema:
    """Column-role declaration for CSV ingest.

    ``counters=None`` infers counter columns as every header not recognized as
    metadata, config_*, or a target. ``require_targets=False`` admits files
    without metric columns (prediction inputs).
    """

    counters: tuple[str, ...] | None = None
    require_targets: bool = True


def load_csv(path: str | Path, schema: CsvSchema | None = None) -> Dataset:
    """Parse a counter CSV file into a Dataset (one sample per data row).

    Expected header: app, system, cores, freq_ghz, optional config_* numeric
    columns, counter columns, and the four target columns. Raises SchemaError
    for missing declared columns, ParseError with row/column for bad cells,
    and EmptyDataError for files with no data.
    """
    path = Path(path)
    with open(path, encoding="utf-8", newline="") as fh:
        text = fh.read()
    return load_csv_text(text, schema, origin=str(path))


def load_csv_text(text: str, schema: CsvSchema | None = None, origin: str = "<csv>") -> Dataset:
    """Parse CSV content from a string; see load_csv for the expected layout."""
    schema = schema or CsvSchema()
    path = origin
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise EmptyDataError(f"{path}: file is empty") from None
    rows = [r for r in reader if r]
    if not rows:
        raise EmptyDataError(f"{path}: no data rows")

    header = [h.strip() for h in header]
    col = {name: i for i, name in enumerate(header)}
    for name in _META_COLUMNS:
        if name not in col:
            raise SchemaError(f"{path}: missing metadata column {name!r}")

    present_targets = tuple(t for t in TARGET_NAMES if t in col)
    if schema.require_targets and len(present_targets) != len(TARGET_NAMES):
        missing = [t for t in TARGET_NAMES if t not in col]
        raise SchemaError(f"{path}: missing target column(s) {', '.join(missing)}")

    config_cols = [h for h in header if h.startswith(CONFIG_PREFIX)]
    reserved = set(_META_COLUMNS) | set(TARGET_NAMES) | set(config_cols)
    if schema.counters is not None:
        counter_names = tuple(schema.counters)
        for c in counter_names:
            if c not in col:
                raise SchemaError(f"{path}: missing counter column {c!r}")
        extra = [h for h in header if h not in reserved and h not in counter_names]
        if extra:
            warnings.warn(f"{path}: ignoring undeclared column(s) {extra}")
    else:
        counter_names = tuple(h for h in header if h not in reserved)

    def cell(row: list[str], line: int, name: str) -> float:
        try:
            return float(row[col[name]])
        except (ValueError, IndexError):
            raise ParseError(
                f"{path}: line {line}, column {name!r}: "
                f"cannot parse {row[col[name]] if col[name] < len(row) else '<missing>'!r} as a number"
            ) from None

    samples = []
    for i, row in enumerate(rows):
        line = i + 2  # header is line 1
        cores_f = cell(row, line, "cores")
        if not float(cores_f).is_integer():
            raise ParseError(f"{path}: line {line}, column 'cores': {cores_f} is not an integer")
        config = {c[len(CONFIG_PREFIX):]: cell(row, line, c) for c in config_cols}
        try:
            sample = CounterSample(
                app_name=row[col["app"]],
                system_name=row[col["system"]],
                num_cores=int(cores_f),
                config_params=config,
                cpu_freq_ghz=cell(row, line, "freq_ghz"),
                counters={c: cell(row, line, c) for c in counter_names},
                targets={t: cell(row, line, t) for t in present_targets},
            )
        except DomainError as e:
            raise DomainError(f"{path}: line {line}: {e}") from None
        samples.append(sample)

    return Dataset(tuple(samples), counter_names, present_targets, normalized=False)


def write_csv(d: Dataset, path: str | Path) -> Path:
    """Write a Dataset back to the CSV layout accepted by load_csv.

    Floats are written with shortest round-trip representation, so
    load_csv(write_csv(d)) reproduces d field-exactly.
    """
    path = Path(path)
    config_keys = sorted({k for s in d.samples for k in s.config_params})
    for i, s in enumerate(d.samples):
        if set(s.config_params) != set(config_keys):
            raise SchemaError(f"sample {i}: inconsistent config keys, cannot write CSV")
    header = (
        list(_META_COLUMNS)
        + [CONFIG_PREFIX + k for k in config_keys]
        + list(d.counter_names)
        + list(d.target_names)
    )
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for s in d.samples:
            row = [s.app_name, s.system_name, s.num_cores, repr(s.cpu_freq_ghz)]
            row += [repr(s.config_params[k]) for k in config_keys]
            row += [repr(s.counters[c]) for c in d.counter_names]
            row += [repr(s.targets[t]) for t in d.target_names]
            writer.writerow(row)
    return path


def normalize_counters(d: Dataset) -> Dataset:
    """Divide every counter by the sample's total-cycles count.

    The divisor column is dropped from the result; counters become events per
    cycle. Raises StateError on already-normalized input and DomainError if a
    row's divisor is not positive.
    """
    if d.normalized:
        raise StateError("dataset is already normalized")
    if NORMALIZER not in d.counter_names:
        raise SchemaError(f"cannot normalize: no {NORMALIZER} column")
    new_names = tuple(c for c in d.counter_names if c != NORMALIZER)
    new_samples = []
    for i, s in enumerate(d.samples):
        tc = s.counters[NORMALIZER]
        if not tc > 0:
            raise DomainError(f"row {i}: {NORMALIZER} must be positive, got {tc}")
        counters = {c: s.counters[c] / tc for c in new_names}
        new_samples.append(dataclasses.replace(s, counters=counters))
    return Dataset(tuple(new_samples), new_names, d.target_names, normalized=True)


def ensure_normalized(d: Dataset) -> Dataset:
    """Coerce a dataset to normalized form.

    Already-normalized datasets pass through; datasets carrying the divisor
    column are normalized; datasets without it are assumed to hold
    already-normalized values and are re-flagged (with a warning).
    """
    if d.normalized:
        return d
    if NORMALIZER in d.counter_names:
        return normalize_counters(d)
    warnings.warn(
        f"dataset has no {NORMALIZER} column; treating counter values as already normalized"
    )
    return Dataset(d.samples, d.counter_names, d.target_names, normalized=True)


def split_indices(n: int, spec: SplitSpec) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic train/test index sets for a dataset of size n.

    Test size is floor(test_fraction * n). Selection uses numpy's PCG64
    generator seeded with spec.seed; the same seed always yields the same
    index sets. Both sets are sorted so within-split order follows the input.
    """
    if n < 5:
        raise SplitError(f"need at least 5 samples to split, got {n}")
    test_size = math.floor(spec.test_fraction * n)
    if test_size == 0 or test_size == n:
        raise SplitError(
            f"test fraction {spec.test_fraction} on {n} samples leaves an empty side"
        )
    rng = np.random.default_rng(int(spec.seed))
    test_idx = np.sort(rng.choice(n, size=test_size, replace=False))
    mask = np.ones(n, dtype=bool)
    mask[test_idx] = False
    train_idx = np.flatnonzero(mask)
    return train_idx, test_idx


def split(d: Dataset, spec: SplitSpec) -> tuple[Dataset, Dataset]:
    """Partition a dataset into (train, test) per the split spec."""
    train_idx, test_idx = split_indices(d.n, spec)
    return d.subset(train_idx), d.subset(test_idx)


@dataclass(frozen=True)
class SynthSpec:
    """Recipe for a synthetic dataset with planted linear structure.

    Counters are uniform on [0, 1) (already in normalized scale); a constant
    TOT_CYC=1 column is added so the file flows through the standard
    normalization step unchanged. Each metric is
    intercept + sum(coef * counter) + freq_coefficient * g(f) + N(0, sigma),
    with f drawn from the five-level frequency set and g either 1/f or f^3.
    ``per_target`` optionally overrides coefficients/intercept/frequency term
    for individual metrics so distinct runtime and power forms can be planted.
    """

    n_samples: int
    n_counters: int
    true_coefficients: Mapping[str, float]
    intercept: float = 0.0
    freq_coefficient: float = 0.0
    freq_term: str = "inverse"
    noise_sigma: float = 0.0
    seed: int = 0
    per_target: Mapping[str, Mapping[str, object]] = field(default_factory=dict)

    def __post_init__(self):
        if self.n_samples <= 0:
            raise ValidationError("n_samples must be positive")
        if self.n_counters <= 0:
            raise ValidationError("n_counters must be positive")
        if self.noise_sigma < 0:
            raise ValidationError("noise_sigma must be nonnegative")
        if self.freq_coefficient < 0:
            raise ValidationError("freq_coefficient must be nonnegative")
        if self.freq_term not in FREQ_TERMS:
            raise ValidationError(f"freq_term must be one of {FREQ_TERMS}")
        names = set(synth_counter_names(self.n_counters))
        allowed_overrides = {"true_coefficients", "intercept", "freq_coefficient", "freq_term"}
        coeff_maps = [dict(self.true_coefficients)]
        for key, over in self.per_target.items():
            if key not in TARGET_NAMES:
                raise ValidationError(f"per_target key {key!r} is not a metric name")
            unknown = set(over) - allowed_overrides
            if unknown:
                raise ValidationError(f"per_target[{key!r}]: unknown field(s) {sorted(unknown)}")
            if "freq_term" in over and over["freq_term"] not in FREQ_TERMS:
                raise ValidationError(f"per_target[{key!r}]: freq_term must be one of {FREQ_TERMS}")
            if "freq_coefficient" in over and float(over["freq_coefficient"]) < 0:  # type: ignore[arg-type]
                raise ValidationError(f"per_target[{key!r}]: freq_coefficient must be nonnegative")
            if "true_coefficients" in over:
                coeff_maps.append(dict(over["true_coefficients"]))  # type: ignore[arg-type]
        for coeffs in coeff_maps:
            for cname, cval in coeffs.items():
                if cname not in names:
                    raise ValidationError(
                        f"coefficient key {cname!r} is not a generated counter name"
                    )
                if cval < 0:
                    raise ValidationError(f"coefficient for {cname!r} must be nonnegative")

    @classmethod
    def from_dict(cls, data: Mapping[str, object]) -> "SynthSpec":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValidationError(f"unknown synth spec field(s): {sorted(unknown)}")
        try:
            return cls(**data)  # type: ignore[arg-type]
        except TypeError as e:
            raise ValidationError(str(e)) from None


def synth_counter_names(n_counters: int) -> list[str]:
    width = max(2, len(str(n_counters)))
    return [f"c{i:0{width}d}" for i in range(1, n_counters + 1)]


def synth_generate(spec: SynthSpec) -> Dataset:
    """Generate a synthetic dataset per the spec; deterministic given the seed."""
    rng = np.random.default_rng(int(spec.seed))
    names = synth_counter_names(spec.n_counters)
    x = rng.random((spec.n_samples, spec.n_counters))
    freqs = rng.choice(np.array(SYNTH_FREQ_CHOICES), size=spec.n_samples)

    target_values: dict[str, np.ndarray] = {}
    for t in TARGET_NAMES:
        over = dict(spec.per_target.get(t, {}))
        coeffs = dict(over.get("true_coefficients", spec.true_coefficients))
        intercept = float(over.get("intercept", spec.intercept))
        fcoef = float(over.get("freq_coefficient", spec.freq_coefficient))
        fterm = str(over.get("freq_term", spec.freq_term))
        coefvec = np.array([coeffs.get(c, 0.0) for c in names])
        noise = rng.standard_normal(spec.n_samples)
        y = intercept + x @ coefvec + fcoef * freq_regressor(freqs, fterm)
        y = y + spec.noise_sigma * noise
        if np.any(y <= 0):
            raise DomainError(
                f"synthetic target {t!r} is not positive everywhere; "
                "raise the intercept or lower noise_sigma"
            )
        target_values[t] = y

    samples = []
    for i in range(spec.n_samples):
        counters = {NORMALIZER: 1.0}
        counters.update({c: float(x[i, j]) for j, c in enumerate(names)})
        samples.append(
            CounterSample(
                app_name="synthetic",
                system_name="synthetic",
                num_cores=1,
                config_params={},
                cpu_freq_ghz=float(freqs[i]),
                counters=counters,
                targets={t: float(target_values[t][i]) for t in TARGET_NAMES},
            )
        )
    return Dataset(tuple(samples), (NORMALIZER, *names), TARGET_NAMES, normalized=False)
