"""Command-line front door: fit, predict, whatif, compare, synth, serve.

Exit codes: 0 on success, 2 for usage/input problems, 1 for internal errors.
Human-readable tables go to stdout, diagnostics to stderr, machine-readable
artifacts to files.
"""

from __future__ import annotations

import argparse
import csv
import json
import socket
import sys
from pathlib import Path

import numpy as np

from .dataset import (
    TARGET_NAMES,
    CsvSchema,
    SplitSpec,
    SynthSpec,
    ensure_normalized,
    load_csv,
    synth_generate,
    write_csv,
)
from .errors import InputError, ModelFitError, PerfModelError, SelectionEmptyError, StateError
from .harness import VALID_METHODS, export_report, run_comparison
from .model import (
    SelectionParams,
    error_rate,
    fit_all,
    load_model_set,
    predict_dataset,
    save_model_set,
)
from .stats import spearman_matrix
from .whatif import WhatIfScenario, evaluate

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_USAGE = 2


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    with open(path, encoding="utf-8") as fh:
        try:
            cfg = json.load(fh)
        except json.JSONDecodeError as e:
            raise InputError(f"{path}: config is not valid JSON: {e}") from None
    if not isinstance(cfg, dict):
        raise InputError(f"{path}: config must be a JSON object")
    return cfg


def _merge_config(args: argparse.Namespace, keys: list[str]) -> argparse.Namespace:
    """Fill argparse None values from --config; flags always win."""
    cfg = _load_config(getattr(args, "config", None))
    unknown = set(cfg) - set(keys)
    if unknown:
        raise InputError(f"config: unknown key(s) {sorted(unknown)}; valid: {keys}")
    for k in keys:
        if getattr(args, k, None) is None and k in cfg:
            setattr(args, k, cfg[k])
    return args


def _require(args: argparse.Namespace, names: list[str]):
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        flags = ", ".join("--" + n.replace("_", "-") for n in missing)
        raise InputError(f"missing required option(s): {flags}")


def cmd_fit(args: argparse.Namespace) -> int:
    _merge_config(args, ["data", "out", "threshold", "variance_target", "max_counters", "seed"])
    _require(args, ["data", "out"])
    if args.seed is not None:
        print("note: fitting is deterministic; --seed is accepted but unused", file=sys.stderr)
    params = SelectionParams(
        relevance_threshold=args.threshold if args.threshold is not None else 0.5,
        variance_target=args.variance_target if args.variance_target is not None else 0.9,
        max_counters=args.max_counters if args.max_counters is not None else 12,
    )
    d = ensure_normalized(load_csv(args.data))
    ms = fit_all(d, params)
    save_model_set(ms, args.out)
    for t in TARGET_NAMES:
        m = ms.models[t]
        print(
            f"{t}: counters={', '.join(m.selected_counters)} | "
            f"r2={m.training_fit.r2:.6f} rmse={m.training_fit.rmse:.6g}"
        )
    print(f"wrote model set to {args.out}", file=sys.stderr)
    return EXIT_OK


def cmd_predict(args: argparse.Namespace) -> int:
    _merge_config(args, ["model", "data", "out"])
    _require(args, ["model", "data", "out"])
    ms = load_model_set(args.model)
    d = ensure_normalized(load_csv(args.data, CsvSchema(require_targets=False)))
    preds = {t: predict_dataset(ms.models[t], d) for t in TARGET_NAMES}
    have_targets = [t for t in TARGET_NAMES if t in d.target_names]
    header = ["sample_index"]
    header += [f"pred_{t}" for t in TARGET_NAMES]
    for t in have_targets:
        header += [f"actual_{t}", f"error_percent_{t}"]
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i in range(d.n):
            row: list = [i]
            row += [repr(float(preds[t][i])) for t in TARGET_NAMES]
            for t in have_targets:
                actual = d.samples[i].targets[t]
                row += [repr(float(actual)), repr(error_rate(float(preds[t][i]), actual))]
            writer.writerow(row)
    print(f"wrote {d.n} prediction rows to {args.out}", file=sys.stderr)
    return EXIT_OK


def cmd_whatif(args: argparse.Namespace) -> int:
    _merge_config(args, ["model", "data", "counter", "delta", "tau", "out"])
    _require(args, ["model", "data", "counter", "delta"])
    out_path = args.out if args.out is not None else "whatif.json"
    ms = load_model_set(args.model)
    d = ensure_normalized(load_csv(args.data, CsvSchema(require_targets=False)))
    corr = spearman_matrix(d, d.counter_names)
    scenario = WhatIfScenario(
        pivot_counter=args.counter,
        delta_percent=float(args.delta),
        baseline=d,
        propagation_tau=float(args.tau) if args.tau is not None else 0.7,
    )
    outcome = evaluate(ms, scenario, corr)
    with open(out_path, "w", encoding="utf-8") as fh:
        json.dump(outcome.to_dict(), fh, indent=2)
        fh.write("\n")
    print(f"{'metric':14s} {'baseline':>12s} {'perturbed':>12s} {'improvement':>12s}")
    for t in TARGET_NAMES:
        o = outcome.metrics[t]
        imp = "undefined" if o.improvement_percent is None else f"{o.improvement_percent:.2f}%"
        print(f"{t:14s} {o.baseline_prediction:12.4f} {o.perturbed_prediction:12.4f} {imp:>12s}")
    moved = {c: v for c, v in outcome.deltas.items() if v != 0.0}
    print(f"applied deltas: {moved}")
    print(f"wrote outcome to {out_path}", file=sys.stderr)
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    _merge_config(
        args, ["data", "methods", "seed", "out", "test_fraction", "folds", "threshold"]
    )
    _require(args, ["data", "out"])
    methods = None
    if args.methods is not None:
        if isinstance(args.methods, str):
            methods = [m.strip() for m in args.methods.split(",") if m.strip()]
        else:
            methods = list(args.methods)
        bad = [m for m in methods if m not in VALID_METHODS]
        if bad:
            raise InputError(
                f"unknown method(s) {bad}; valid methods: {', '.join(VALID_METHODS)}"
            )
    d = load_csv(args.data)
    spec = SplitSpec(
        test_fraction=args.test_fraction if args.test_fraction is not None else 0.2,
        seed=args.seed if args.seed is not None else 0,
    )
    params = SelectionParams(
        relevance_threshold=args.threshold if args.threshold is not None else 0.5
    )
    report = run_comparison(
        d,
        spec,
        methods=methods,
        params=params,
        folds=args.folds if args.folds is not None else 3,
        dataset_id=Path(args.data).stem,
    )
    out_dir = Path(args.out)
    paths = export_report(report, "json", out_dir)
    paths += export_report(report, "csv", out_dir)
    print(f"{'method':20s}" + "".join(t.rjust(14) for t in report.targets))
    for m in report.methods:
        row = f"{m:20s}"
        for t in report.targets:
            cell = report.cells[m][t]
            if cell.failed:
                row += "FAIL".rjust(14)
            else:
                row += f"{float(np.mean(np.abs(cell.errors_percent))):.4f}%".rjust(14)
        print(row)
    for p in paths:
        print(f"wrote {p}", file=sys.stderr)
    return EXIT_OK


def cmd_synth(args: argparse.Namespace) -> int:
    _merge_config(args, ["spec", "out"])
    _require(args, ["spec", "out"])
    with open(args.spec, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as e:
            raise InputError(f"{args.spec}: not valid JSON: {e}") from None
    spec = SynthSpec.from_dict(doc)
    d = synth_generate(spec)
    write_csv(d, args.out)
    print(f"wrote {d.n} samples x {len(d.counter_names)} counters to {args.out}", file=sys.stderr)
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    _merge_config(args, ["port", "host", "data_dir"])
    host = args.host if args.host is not None else "127.0.0.1"
    port = args.port if args.port is not None else 8040
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.bind((host, port))
    except OSError as e:
        raise InputError(f"cannot bind {host}:{port}: {e}") from None
    finally:
        probe.close()

    import uvicorn

    from .service import create_app

    app = create_app(data_dir=args.data_dir)
    print(f"serving on http://{host}:{port}/api/v1 (ui at /ui if built)", file=sys.stderr)
    uvicorn.run(app, host=host, port=port, log_level="warning")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="perfmodel",
        description="Counter-based runtime/power modeling, what-if prediction, and method comparison.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit the four metric models from a counter CSV")
    p.add_argument("--data", help="input CSV with counters and the four metrics")
    p.add_argument("--out", help="output model JSON path")
    p.add_argument("--threshold", type=float, help="relevance threshold (default 0.5)")
    p.add_argument("--variance-target", dest="variance_target", type=float, help="PCA variance target (default 0.9)")
    p.add_argument("--max-counters", dest="max_counters", type=int, help="max selected counters (default 12)")
    p.add_argument("--seed", type=int, help="accepted for interface symmetry; fitting is deterministic")
    p.add_argument("--config", help="JSON config file; flags override its keys")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="predict the four metrics for CSV rows")
    p.add_argument("--model", help="model JSON from 'fit'")
    p.add_argument("--data", help="input CSV (targets optional)")
    p.add_argument("--out", help="output CSV path")
    p.add_argument("--config", help="JSON config file; flags override its keys")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("whatif", help="predict improvements for a counter optimization")
    p.add_argument("--model", help="model JSON from 'fit'")
    p.add_argument("--data", help="baseline CSV (the samples to average over)")
    p.add_argument("--counter", help="pivot counter name")
    p.add_argument("--delta", type=float, help="percent change, e.g. -30")
    p.add_argument("--tau", type=float, help="propagation threshold (default 0.7)")
    p.add_argument("--out", help="outcome JSON path (default whatif.json)")
    p.add_argument("--config", help="JSON config file; flags override its keys")
    p.set_defaults(func=cmd_whatif)

    p = sub.add_parser("compare", help="split, fit all methods, report error distributions")
    p.add_argument("--data", help="input CSV")
    p.add_argument("--methods", help=f"comma-separated subset of: {', '.join(VALID_METHODS)}")
    p.add_argument("--seed", type=int, help="split/tuning seed (default 0)")
    p.add_argument("--test-fraction", dest="test_fraction", type=float, help="held-out fraction (default 0.2)")
    p.add_argument("--folds", type=int, help="tuning CV folds (default 3)")
    p.add_argument("--threshold", type=float, help="counter-model relevance threshold (default 0.5)")
    p.add_argument("--out", help="output directory for report.json/errors.csv/summary.csv")
    p.add_argument("--config", help="JSON config file; flags override its keys")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("synth", help="generate a synthetic counter CSV from a spec")
    p.add_argument("--spec", help="JSON file describing the synthetic dataset")
    p.add_argument("--out", help="output CSV path")
    p.add_argument("--config", help="JSON config file; flags override its keys")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--port", type=int, help="TCP port (default 8040)")
    p.add_argument("--host", help="bind address (default 127.0.0.1)")
    p.add_argument("--data-dir", dest="data_dir", help="directory of CSVs to preload as datasets")
    p.add_argument("--config", help="JSON config file; flags override its keys")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits 2 on usage errors and 0 on --help; pass both through
        return int(e.code or 0)
    try:
        return args.func(args)
    except ModelFitError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE if isinstance(e.cause, (InputError, SelectionEmptyError, StateError)) else EXIT_INTERNAL
    except (InputError, SelectionEmptyError, StateError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except PerfModelError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as e:  # pragma: no cover - last-resort guard
        print(f"internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
