"""Dataset container, CSV ingest, normalization, splitting, synthesis."""

import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from perfmodel.dataset import (
    CounterSample,
    CsvSchema,
    Dataset,
    SplitSpec,
    SynthSpec,
    ensure_normalized,
    load_csv,
    load_csv_text,
    normalize_counters,
    split,
    split_indices,
    synth_counter_names,
    synth_generate,
    write_csv,
    FREQ_COLUMN,
    NORMALIZER,
    TARGET_NAMES,
)
from perfmodel.errors import (
    DomainError,
    EmptyDataError,
    ParseError,
    SchemaError,
    SplitError,
    StateError,
    UnknownColumnError,
    ValidationError,
)
from conftest import make_dataset, planted_spec


def sample(**over):
    base = dict(
        app_name="a",
        system_name="s",
        num_cores=4,
        config_params={},
        cpu_freq_ghz=2.0,
        counters={"c1": 1.0},
        targets={"runtime_s": 3.0},
    )
    base.update(over)
    return CounterSample(**base)


CSV_TEXT = """app,system,cores,freq_ghz,config_tile,c1,c2,runtime_s,node_power_w,cpu_power_w,mem_power_w
lu,ivy,16,2.1,32,100.0,40.0,12.5,210.0,130.0,55.0
lu,ivy,16,1.5,32,90.0,40.0,16.0,180.0,100.0,50.0
mg,ivy,16,2.1,64,120.0,80.0,9.0,220.0,140.0,60.0
"""


# --- CounterSample / Dataset validation --------------------------------------


def test_sample_rejects_bad_fields():
    with pytest.raises(DomainError):
        sample(num_cores=0)
    with pytest.raises(DomainError):
        sample(cpu_freq_ghz=0.0)
    with pytest.raises(DomainError):
        sample(counters={"c1": -1.0})
    with pytest.raises(DomainError):
        sample(targets={"runtime_s": 0.0})
    with pytest.raises(UnknownColumnError):
        sample(targets={"bogus_metric": 1.0})
    with pytest.raises(DomainError):
        sample(counters={NORMALIZER: 0.0})


def test_dataset_rejects_mismatched_samples():
    s1 = sample()
    s2 = sample(counters={"c2": 1.0})
    with pytest.raises(SchemaError):
        Dataset((s1, s2), ("c1",), ("runtime_s",))
    with pytest.raises(SchemaError):
        Dataset((s1,), ("c1", "c1"), ("runtime_s",))


def test_column_resolution_and_order():
    d = make_dataset(
        counters={"b": np.array([1.0, 2.0]), "a": np.array([3.0, 4.0])},
        targets={"runtime_s": np.array([5.0, 6.0])},
        freq=np.array([2.0, 1.5]),
    )
    assert np.array_equal(d.column("a"), [3.0, 4.0])
    assert np.array_equal(d.column("runtime_s"), [5.0, 6.0])
    assert np.array_equal(d.column(FREQ_COLUMN), [2.0, 1.5])
    # matrix follows the requested order, not alphabetical
    m = d.matrix(["b", "a"])
    assert np.array_equal(m, [[1.0, 3.0], [2.0, 4.0]])
    assert np.array_equal(d.counter_matrix(), m)
    with pytest.raises(UnknownColumnError):
        d.column("nope")


def test_subset_preserves_metadata():
    d = make_dataset(
        counters={"c1": np.arange(1.0, 6.0)},
        targets={"runtime_s": np.arange(1.0, 6.0)},
        freq=np.full(5, 2.0),
    )
    sub = d.subset([4, 0])
    assert sub.n == 2
    assert np.array_equal(sub.column("c1"), [5.0, 1.0])
    assert sub.normalized == d.normalized
    assert sub.counter_names == d.counter_names


# --- CSV ingest ---------------------------------------------------------------


def test_load_csv_text_basic():
    d = load_csv_text(CSV_TEXT)
    assert d.n == 3
    assert d.counter_names == ("c1", "c2")
    assert d.target_names == TARGET_NAMES
    assert not d.normalized
    assert d.samples[0].app_name == "lu"
    assert d.samples[0].num_cores == 16
    assert d.samples[2].config_params == {"tile": 64.0}
    assert np.array_equal(d.column("tile"), [32.0, 32.0, 64.0])
    assert np.array_equal(d.column("c2"), [40.0, 40.0, 80.0])


def test_load_csv_roundtrip_exact(tmp_path):
    rng = np.random.default_rng(1)
    d = make_dataset(
        counters={"c1": rng.random(6) * 1e9, "c2": rng.random(6)},
        targets={t: rng.random(6) + 0.5 for t in TARGET_NAMES},
        freq=rng.choice([1.2, 2.3], size=6),
        normalized=False,
    )
    p = write_csv(d, tmp_path / "d.csv")
    back = load_csv(p)
    assert back.counter_names == d.counter_names
    assert back.n == d.n
    for s1, s2 in zip(d.samples, back.samples):
        assert s1 == s2  # field-exact, including float bits


def test_load_csv_missing_metadata_column():
    with pytest.raises(SchemaError, match="cores"):
        load_csv_text(CSV_TEXT.replace("cores", "ncores"))


def test_load_csv_missing_target():
    broken = CSV_TEXT.replace("runtime_s", "rt")
    with pytest.raises(SchemaError, match="runtime_s"):
        load_csv_text(broken)
    # but fine when targets are not required; rt becomes a counter
    d = load_csv_text(broken, CsvSchema(require_targets=False))
    assert "rt" in d.counter_names
    assert d.target_names == ("node_power_w", "cpu_power_w", "mem_power_w")


def test_load_csv_declared_counters():
    with pytest.warns(UserWarning):  # c2 present but undeclared
        d = load_csv_text(CSV_TEXT, CsvSchema(counters=("c1",), require_targets=True))
    assert d.counter_names == ("c1",)
    with pytest.raises(SchemaError, match="c9"):
        load_csv_text(CSV_TEXT, CsvSchema(counters=("c1", "c9")))


def test_load_csv_warns_on_undeclared_extra():
    with pytest.warns(UserWarning, match="c2"):
        load_csv_text(CSV_TEXT, CsvSchema(counters=("c1",)))


def test_load_csv_bad_cell_reports_position():
    broken = CSV_TEXT.replace("90.0", "oops")
    with pytest.raises(ParseError, match="line 3.*'c1'"):
        load_csv_text(broken)


def test_load_csv_non_integer_cores():
    broken = CSV_TEXT.replace("16,2.1,32,100.0", "16.5,2.1,32,100.0")
    with pytest.raises(ParseError, match="cores"):
        load_csv_text(broken)


def test_load_csv_empty_inputs():
    with pytest.raises(EmptyDataError):
        load_csv_text("")
    header_only = CSV_TEXT.splitlines()[0] + "\n"
    with pytest.raises(EmptyDataError):
        load_csv_text(header_only)


def test_load_csv_skips_blank_rows():
    padded = CSV_TEXT.replace(
        "mg,ivy", "\nmg,ivy"
    )
    assert load_csv_text(padded).n == 3


def test_load_csv_negative_counter_reports_line():
    broken = CSV_TEXT.replace("120.0", "-120.0")
    with pytest.raises(DomainError, match="line 4"):
        load_csv_text(broken)


def test_write_csv_inconsistent_config(tmp_path):
    s1 = sample(config_params={"tile": 1.0})
    s2 = sample(config_params={"block": 2.0})
    d = Dataset((s1, s2), ("c1",), ("runtime_s",))
    with pytest.raises(SchemaError, match="config"):
        write_csv(d, tmp_path / "x.csv")


# --- normalization ------------------------------------------------------------


def raw_dataset():
    return make_dataset(
        counters={
            NORMALIZER: np.array([2.0, 4.0]),
            "c1": np.array([1.0, 1.0]),
            "c2": np.array([6.0, 2.0]),
        },
        targets={"runtime_s": np.array([1.0, 2.0])},
        freq=np.array([2.0, 2.0]),
        normalized=False,
    )


def test_normalize_divides_and_drops():
    d = normalize_counters(raw_dataset())
    assert d.normalized
    assert NORMALIZER not in d.counter_names
    assert np.array_equal(d.column("c1"), [0.5, 0.25])
    assert np.array_equal(d.column("c2"), [3.0, 0.5])
    # targets and frequency untouched
    assert np.array_equal(d.column("runtime_s"), [1.0, 2.0])
    assert np.array_equal(d.freq(), [2.0, 2.0])


def test_normalize_twice_is_an_error():
    d = normalize_counters(raw_dataset())
    with pytest.raises(StateError):
        normalize_counters(d)


def test_normalize_requires_divisor_column():
    d = make_dataset(
        counters={"c1": np.array([1.0])},
        targets={"runtime_s": np.array([1.0])},
        freq=np.array([2.0]),
        normalized=False,
    )
    with pytest.raises(SchemaError):
        normalize_counters(d)


def test_zero_divisor_rejected_at_construction():
    # a nonpositive TOT_CYC can never enter a dataset, so normalization
    # always has a valid divisor
    with pytest.raises(DomainError):
        make_dataset(
            counters={NORMALIZER: np.array([0.0]), "c1": np.array([1.0])},
            targets={"runtime_s": np.array([1.0])},
            freq=np.array([2.0]),
            normalized=False,
        )


def test_ensure_normalized_paths():
    d = normalize_counters(raw_dataset())
    assert ensure_normalized(d) is d
    assert ensure_normalized(raw_dataset()) == d
    flagless = Dataset(d.samples, d.counter_names, d.target_names, normalized=False)
    with pytest.warns(UserWarning, match=NORMALIZER):
        refl = ensure_normalized(flagless)
    assert refl.normalized
    assert np.array_equal(refl.column("c1"), d.column("c1"))


# --- splitting ------------------------------------------------------------------


def test_split_sizes_144_and_80():
    train, test = split_indices(144, SplitSpec(0.2, 3456))
    assert (len(train), len(test)) == (116, 28)
    train, test = split_indices(80, SplitSpec(0.2, 3456))
    assert (len(train), len(test)) == (64, 16)


def test_split_is_deterministic_across_calls():
    spec = SplitSpec(0.2, 99)
    first = split_indices(200, spec)
    for _ in range(100):
        again = split_indices(200, spec)
        assert np.array_equal(first[0], again[0])
        assert np.array_equal(first[1], again[1])


def test_split_partitions_and_is_sorted():
    train, test = split_indices(50, SplitSpec(0.3, 7))
    combined = np.concatenate([train, test])
    assert np.array_equal(np.sort(combined), np.arange(50))
    assert np.array_equal(train, np.sort(train))
    assert np.array_equal(test, np.sort(test))


def test_split_seed_changes_selection():
    a = split_indices(100, SplitSpec(0.2, 1))[1]
    b = split_indices(100, SplitSpec(0.2, 2))[1]
    assert not np.array_equal(a, b)


def test_split_errors():
    with pytest.raises(SplitError):
        split_indices(4, SplitSpec(0.5, 0))
    with pytest.raises(SplitError):
        split_indices(5, SplitSpec(0.1, 0))  # floor(0.5) == 0
    with pytest.raises(ValidationError):
        SplitSpec(1.0, 0)
    with pytest.raises(ValidationError):
        SplitSpec(0.2, -1)


def test_split_dataset_matches_indices(planted_dataset):
    spec = SplitSpec(0.25, 5)
    train, test = split(planted_dataset, spec)
    ti, si = split_indices(planted_dataset.n, spec)
    assert train.n == len(ti) and test.n == len(si)
    assert train.samples == tuple(planted_dataset.samples[i] for i in ti)
    assert test.samples == tuple(planted_dataset.samples[i] for i in si)


@settings(max_examples=60, deadline=None)
@given(
    n=st.integers(5, 400),
    frac=st.floats(0.05, 0.95),
    seed=st.integers(0, 2**32 - 1),
)
def test_split_partition_property(n, frac, seed):
    expected_test = math.floor(frac * n)
    if expected_test in (0, n):
        return
    train, test = split_indices(n, SplitSpec(frac, seed))
    assert len(test) == expected_test
    assert len(train) == n - expected_test
    assert np.array_equal(np.sort(np.concatenate([train, test])), np.arange(n))


# --- synthesis -------------------------------------------------------------------


def test_synth_counter_names_padding():
    assert synth_counter_names(3) == ["c01", "c02", "c03"]
    assert synth_counter_names(10)[-1] == "c10"
    names = synth_counter_names(100)
    assert names[0] == "c001" and names[-1] == "c100"


def test_synth_spec_validation():
    with pytest.raises(ValidationError):
        SynthSpec(n_samples=0, n_counters=1, true_coefficients={})
    with pytest.raises(ValidationError, match="c99"):
        SynthSpec(n_samples=5, n_counters=2, true_coefficients={"c99": 1.0})
    with pytest.raises(ValidationError, match="nonnegative"):
        SynthSpec(n_samples=5, n_counters=2, true_coefficients={"c01": -1.0})
    with pytest.raises(ValidationError, match="metric"):
        SynthSpec(n_samples=5, n_counters=2, true_coefficients={}, per_target={"bogus": {}})
    with pytest.raises(ValidationError, match="unknown field"):
        SynthSpec(
            n_samples=5,
            n_counters=2,
            true_coefficients={},
            per_target={"runtime_s": {"slope": 1.0}},
        )
    with pytest.raises(ValidationError):
        SynthSpec(n_samples=5, n_counters=2, true_coefficients={}, freq_term="linear")


def test_synth_from_dict_rejects_unknown_fields():
    with pytest.raises(ValidationError, match="wat"):
        SynthSpec.from_dict({"n_samples": 5, "n_counters": 2, "true_coefficients": {}, "wat": 1})


def test_synth_deterministic():
    spec = planted_spec(n_samples=30)
    assert synth_generate(spec) == synth_generate(spec)
    other = synth_generate(planted_spec(n_samples=30, seed=43))
    assert other != synth_generate(spec)


def test_synth_planted_structure_exact():
    spec = SynthSpec(
        n_samples=40,
        n_counters=3,
        true_coefficients={"c01": 2.0, "c03": 1.5},
        intercept=10.0,
        freq_coefficient=4.0,
        freq_term="inverse",
        noise_sigma=0.0,
        seed=5,
    )
    d = synth_generate(spec)
    assert np.array_equal(d.column(NORMALIZER), np.ones(40))
    x1, x3, f = d.column("c01"), d.column("c03"), d.freq()
    expected = 10.0 + 2.0 * x1 + 1.5 * x3 + 4.0 / f
    assert np.allclose(d.column("runtime_s"), expected, rtol=1e-12)
    # without per_target overrides every metric uses the same recipe
    assert np.allclose(d.column("node_power_w"), expected, rtol=1e-12)
    assert np.all((x1 >= 0) & (x1 < 1))
    assert set(np.unique(f)) <= {1.2, 1.5, 1.8, 2.1, 2.3}


def test_synth_per_target_override():
    d = synth_generate(planted_spec(n_samples=25, noise_sigma=0.0))
    f = d.freq()
    x = d.column("c01") * 6.0 + d.column("c02") * 6.0
    assert np.allclose(d.column("runtime_s"), 50.0 + x + 6.0 / f, rtol=1e-12)
    assert np.allclose(d.column("node_power_w"), 200.0 + x + 0.3 * f**3, rtol=1e-12)
    assert np.allclose(d.column("mem_power_w"), 80.0 + x + 0.1 * f**3, rtol=1e-12)


def test_synth_rejects_nonpositive_targets():
    spec = SynthSpec(n_samples=10, n_counters=1, true_coefficients={}, intercept=0.0, seed=0)
    with pytest.raises(DomainError, match="intercept"):
        synth_generate(spec)


def test_synth_noise_draw_order_is_stable():
    """Adding noise must not change the counters or frequencies drawn."""
    quiet = synth_generate(planted_spec(n_samples=20, noise_sigma=0.0))
    noisy = synth_generate(planted_spec(n_samples=20, noise_sigma=0.05))
    assert np.array_equal(quiet.column("c01"), noisy.column("c01"))
    assert np.array_equal(quiet.freq(), noisy.freq())
    assert not np.array_equal(quiet.column("runtime_s"), noisy.column("runtime_s"))


def test_synth_flows_through_normalization():
    d = synth_generate(planted_spec(n_samples=12))
    before = d.column("c05")
    with warnings.catch_warnings():
        warnings.simplefilter("error")  # must not warn: divisor column present
        norm = ensure_normalized(d)
    assert norm.normalized and NORMALIZER not in norm.counter_names
    assert np.array_equal(norm.column("c05"), before)  # TOT_CYC == 1
