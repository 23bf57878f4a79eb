"""Counter-based runtime and power modeling for HPC applications.

Fits per-metric linear models (runtime, node/CPU/memory power) on selected
hardware-counter rates plus a frequency term, evaluates what-if counter
optimizations, and benchmarks against six reference ML regressors.
"""

from .dataset import (
    TARGET_NAMES,
    CounterSample,
    CsvSchema,
    Dataset,
    SplitSpec,
    SynthSpec,
    ensure_normalized,
    load_csv,
    normalize_counters,
    split,
    synth_generate,
    write_csv,
)
from .errors import PerfModelError
from .harness import ComparisonReport, export_report, run_comparison
from .model import (
    FittedModel,
    ModelSet,
    SelectionParams,
    error_rate,
    fit,
    fit_all,
    load_model_set,
    predict,
    rank_counters,
    save_model_set,
    select_counters,
)
from .stats import CorrelationMatrix, DensityCurve, PcaResult, correlation_groups, kde, pca, spearman, spearman_matrix
from .whatif import WhatIfOutcome, WhatIfScenario, evaluate, propagate

__version__ = "0.1.0"

__all__ = [
    "TARGET_NAMES",
    "CounterSample",
    "CsvSchema",
    "Dataset",
    "SplitSpec",
    "SynthSpec",
    "ensure_normalized",
    "load_csv",
    "normalize_counters",
    "split",
    "synth_generate",
    "write_csv",
    "PerfModelError",
    "ComparisonReport",
    "export_report",
    "run_comparison",
    "FittedModel",
    "ModelSet",
    "SelectionParams",
    "error_rate",
    "fit",
    "fit_all",
    "load_model_set",
    "predict",
    "rank_counters",
    "save_model_set",
    "select_counters",
    "CorrelationMatrix",
    "DensityCurve",
    "PcaResult",
    "correlation_groups",
    "kde",
    "pca",
    "spearman",
    "spearman_matrix",
    "WhatIfOutcome",
    "WhatIfScenario",
    "evaluate",
    "propagate",
    "__version__",
]
