"""HTTP API over datasets, models, comparisons, and what-if evaluation.

All endpoints live under /api/v1 and speak the library's JSON serializations.
Entities (datasets, model sets, reports) live in a capacity-bounded in-memory
LRU store; fits and comparisons run on a worker pool so requests return
promptly with a pending state when the work outlasts the grace wait.
"""

from __future__ import annotations

import concurrent.futures
import itertools
import json
import threading
import uuid
import warnings
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .dataset import (
    NORMALIZER,
    TARGET_NAMES,
    CounterSample,
    CsvSchema,
    Dataset,
    SplitSpec,
    ensure_normalized,
    load_csv,
    load_csv_text,
)
from .errors import InputError
from .harness import VALID_METHODS, run_comparison
from .model import (
    ModelSet,
    SelectionParams,
    error_rate,
    fit_all,
    model_set_to_dict,
    predict,
)
from .stats import spearman_matrix
from .whatif import WhatIfScenario, evaluate

API_PREFIX = "/api/v1"
DEFAULT_CAPACITY = 64
GRACE_WAIT_SECONDS = 5.0


class ApiError(Exception):
    """Carries an HTTP status plus field-level messages."""

    def __init__(self, status: int, field: str, message: str):
        super().__init__(message)
        self.status = status
        self.field = field

    def response(self) -> JSONResponse:
        return JSONResponse(
            status_code=self.status,
            content={"detail": [{"field": self.field, "message": str(self)}]},
        )


def _bad_request(field: str, message: str) -> ApiError:
    return ApiError(400, field, message)


def _not_found(field: str, message: str) -> ApiError:
    return ApiError(404, field, message)


class LruStore:
    """Insertion/access-ordered id -> entry map with pinned-entry protection.

    Entries touched by an in-flight request are pinned; eviction removes the
    least recently used unpinned entry and simply overflows if everything is
    pinned (never breaks an active request).
    """

    def __init__(self, capacity: int):
        self.capacity = capacity
        self._items: dict[str, dict] = {}
        self._pins: dict[str, int] = {}
        self._lock = threading.RLock()

    def put(self, key: str, value: dict):
        with self._lock:
            self._items.pop(key, None)
            self._items[key] = value
            self._evict()

    def get(self, key: str) -> dict | None:
        with self._lock:
            if key not in self._items:
                return None
            value = self._items.pop(key)
            self._items[key] = value  # refresh recency
            return value

    def pin(self, key: str):
        with self._lock:
            self._pins[key] = self._pins.get(key, 0) + 1

    def unpin(self, key: str):
        with self._lock:
            n = self._pins.get(key, 0) - 1
            if n <= 0:
                self._pins.pop(key, None)
            else:
                self._pins[key] = n

    def _evict(self):
        while len(self._items) > self.capacity:
            victim = next((k for k in self._items if k not in self._pins), None)
            if victim is None:
                return
            del self._items[victim]

    def __contains__(self, key: str) -> bool:
        with self._lock:
            return key in self._items


class SessionStore:
    """Datasets, model sets, and reports, each in its own LRU."""

    def __init__(self, capacity: int = DEFAULT_CAPACITY):
        self.datasets = LruStore(capacity)
        self.models = LruStore(capacity)
        self.reports = LruStore(capacity)
        self._counter = itertools.count(1)
        self._lock = threading.Lock()
        self.inflight: set[str] = set()

    def new_id(self, prefix: str) -> str:
        with self._lock:
            return f"{prefix}-{next(self._counter)}"


class FitParamsBody(BaseModel):
    relevance_threshold: float = 0.5
    variance_target: float = 0.9
    max_counters: int = 12


class ModelsBody(BaseModel):
    dataset_id: str
    params: FitParamsBody = FitParamsBody()


class SampleBody(BaseModel):
    counters: dict[str, float]
    cpu_freq_ghz: float
    targets: dict[str, float] = {}


class PredictBody(BaseModel):
    model_id: str
    samples: list[SampleBody]


class WhatIfBody(BaseModel):
    model_id: str
    dataset_id: str
    counter: str
    delta_percent: float
    tau: float = 0.7


class CompareBody(BaseModel):
    dataset_id: str
    methods: list[str] | None = None
    seed: int = 0
    test_fraction: float = 0.2
    folds: int = 3


def _dataset_summary(ds_id: str, d: Dataset) -> dict:
    return {
        "id": ds_id,
        "n_samples": d.n,
        "columns": list(d.counter_names) + list(d.target_names),
        "counters": list(d.counter_names),
        "targets": list(d.target_names),
    }


def _model_summary(model_id: str, state: str, ms: ModelSet | None) -> dict:
    doc: dict = {"model_id": model_id, "state": state}
    if ms is not None:
        doc["summary"] = {
            t: {
                "selected_counters": list(ms.models[t].selected_counters),
                "r2": ms.models[t].training_fit.r2,
                "rmse": ms.models[t].training_fit.rmse,
            }
            for t in TARGET_NAMES
        }
    return doc


def _normalize_sample(body: SampleBody, index: int) -> CounterSample:
    counters = dict(body.counters)
    if NORMALIZER in counters:
        tc = counters.pop(NORMALIZER)
        if not tc > 0:
            raise _bad_request(f"samples[{index}].counters.{NORMALIZER}", "must be positive")
        counters = {c: v / tc for c, v in counters.items()}
    try:
        return CounterSample(
            app_name="api",
            system_name="api",
            num_cores=1,
            config_params={},
            cpu_freq_ghz=body.cpu_freq_ghz,
            counters=counters,
            targets=dict(body.targets),
        )
    except InputError as e:
        raise _bad_request(f"samples[{index}]", str(e)) from None


def create_app(
    capacity: int = DEFAULT_CAPACITY,
    data_dir: str | None = None,
    ui_dir: str | None = None,
    wait_seconds: float = GRACE_WAIT_SECONDS,
    executor: concurrent.futures.Executor | None = None,
) -> FastAPI:
    """Build the service app.

    data_dir preloads every *.csv in the directory as a dataset keyed by file
    stem. ui_dir (default: frontend/dist next to the repo root) is served at
    /ui when present. wait_seconds bounds how long POST /models and
    POST /compare wait before answering with a pending state.
    """
    app = FastAPI(title="perfmodel service", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    store = SessionStore(capacity)
    pool = executor or concurrent.futures.ThreadPoolExecutor(max_workers=2)
    app.state.store = store

    if data_dir is not None:
        for csv_path in sorted(Path(data_dir).glob("*.csv")):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                raw = load_csv(csv_path, CsvSchema(require_targets=False))
                entry = {"dataset": raw, "normalized": ensure_normalized(raw)}
            store.datasets.put(csv_path.stem, entry)

    @app.exception_handler(ApiError)
    async def _api_error(_req: Request, exc: ApiError):
        return exc.response()

    @app.exception_handler(RequestValidationError)
    async def _validation_error(_req: Request, exc: RequestValidationError):
        detail = [
            {
                "field": ".".join(str(p) for p in err.get("loc", ()) if p != "body"),
                "message": err.get("msg", "invalid value"),
            }
            for err in exc.errors()
        ]
        return JSONResponse(status_code=400, content={"detail": detail})

    @app.exception_handler(Exception)
    async def _internal_error(_req: Request, exc: Exception):
        ref = uuid.uuid4().hex[:8]
        print(f"internal error {ref}: {type(exc).__name__}: {exc}", flush=True)
        return JSONResponse(
            status_code=500,
            content={"detail": [{"field": "", "message": f"internal error (ref {ref})"}]},
        )

    def _get_dataset(ds_id: str, field: str = "dataset_id") -> dict:
        entry = store.datasets.get(ds_id)
        if entry is None:
            raise _not_found(field, f"unknown dataset {ds_id!r}")
        return entry

    def _get_model(model_id: str, field: str = "model_id") -> dict:
        entry = store.models.get(model_id)
        if entry is None:
            raise _not_found(field, f"unknown model {model_id!r}")
        return entry

    def _finish(entry: dict, fut: concurrent.futures.Future, key: str, result_key: str):
        with store._lock:
            if entry["state"] != "pending":
                return
            try:
                entry[result_key] = fut.result()
                entry["state"] = "ready"
            except Exception as e:
                entry["state"] = "failed"
                entry["error"] = f"{type(e).__name__}: {e}"
            store.inflight.discard(key)

    @app.get(API_PREFIX + "/health")
    def health():
        return PlainTextResponse("ok")

    @app.post(API_PREFIX + "/datasets")
    async def upload_dataset(request: Request):
        body = await request.body()
        try:
            text = body.decode("utf-8")
        except UnicodeDecodeError:
            raise _bad_request("body", "dataset body must be UTF-8 CSV text") from None
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                raw = load_csv_text(text, CsvSchema(require_targets=False), origin="upload")
                normalized = ensure_normalized(raw)
        except InputError as e:
            raise _bad_request("body", str(e)) from None
        ds_id = store.new_id("ds")
        store.datasets.put(ds_id, {"dataset": raw, "normalized": normalized})
        return _dataset_summary(ds_id, raw)

    @app.post(API_PREFIX + "/models")
    def fit_model(body: ModelsBody):
        entry = _get_dataset(body.dataset_id)
        try:
            params = SelectionParams(
                relevance_threshold=body.params.relevance_threshold,
                variance_target=body.params.variance_target,
                max_counters=body.params.max_counters,
            )
        except InputError as e:
            raise _bad_request("params", str(e)) from None
        inflight_key = "fit:" + body.dataset_id + ":" + json.dumps(
            body.params.model_dump(), sort_keys=True
        )
        with store._lock:
            if inflight_key in store.inflight:
                raise ApiError(409, "dataset_id", "an identical fit is already in flight")
            store.inflight.add(inflight_key)
        model_id = store.new_id("mdl")
        model_entry: dict = {
            "state": "pending",
            "model_set": None,
            "error": None,
            "dataset_id": body.dataset_id,
            "params": body.params.model_dump(),
        }
        store.models.put(model_id, model_entry)
        store.datasets.pin(body.dataset_id)

        def job() -> ModelSet:
            try:
                return fit_all(entry["normalized"], params)
            finally:
                store.datasets.unpin(body.dataset_id)

        fut = pool.submit(job)
        fut.add_done_callback(lambda f: _finish(model_entry, f, inflight_key, "model_set"))
        concurrent.futures.wait([fut], timeout=wait_seconds)
        if fut.done():
            _finish(model_entry, fut, inflight_key, "model_set")
        state = model_entry["state"]
        doc = _model_summary(model_id, state, model_entry["model_set"] if state == "ready" else None)
        if state == "failed":
            doc["error"] = model_entry["error"]
        return doc

    @app.get(API_PREFIX + "/models/{model_id}")
    def get_model(model_id: str):
        entry = _get_model(model_id)
        state = entry["state"]
        doc: dict = {"model_id": model_id, "state": state}
        if state == "ready":
            doc["model"] = model_set_to_dict(entry["model_set"])
        elif state == "failed":
            doc["error"] = entry["error"]
        return doc

    def _require_ready_model(model_id: str) -> ModelSet:
        entry = _get_model(model_id)
        if entry["state"] == "pending":
            raise ApiError(409, "model_id", f"model {model_id!r} is still fitting")
        if entry["state"] == "failed":
            raise _bad_request("model_id", f"model {model_id!r} failed: {entry['error']}")
        return entry["model_set"]

    @app.post(API_PREFIX + "/predict")
    def predict_samples(body: PredictBody):
        ms = _require_ready_model(body.model_id)
        if not body.samples:
            raise _bad_request("samples", "need at least one sample")
        rows = []
        for i, sample_body in enumerate(body.samples):
            sample = _normalize_sample(sample_body, i)
            row: dict = {}
            for t in TARGET_NAMES:
                try:
                    p = predict(ms.models[t], sample)
                except InputError as e:
                    raise _bad_request(f"samples[{i}]", str(e)) from None
                err = None
                if t in sample.targets:
                    err = error_rate(p, sample.targets[t])
                row[t] = {"prediction": p, "error_percent": err}
            rows.append(row)
        return {"model_id": body.model_id, "predictions": rows}

    @app.post(API_PREFIX + "/whatif")
    def whatif(body: WhatIfBody):
        ms = _require_ready_model(body.model_id)
        entry = _get_dataset(body.dataset_id)
        d = entry["normalized"]
        if "correlations" not in entry:
            entry["correlations"] = spearman_matrix(d, d.counter_names)
        corr = entry["correlations"]
        if body.counter not in corr.names:
            raise _bad_request("counter", f"unknown counter {body.counter!r}")
        try:
            scenario = WhatIfScenario(
                pivot_counter=body.counter,
                delta_percent=body.delta_percent,
                baseline=d,
                propagation_tau=body.tau,
            )
        except InputError as e:
            raise _bad_request("delta_percent", str(e)) from None
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                outcome = evaluate(ms, scenario, corr)
        except InputError as e:
            raise _bad_request("dataset_id", str(e)) from None
        return outcome.to_dict()

    @app.post(API_PREFIX + "/compare")
    def compare(body: CompareBody):
        entry = _get_dataset(body.dataset_id)
        if body.methods is not None:
            bad = [m for m in body.methods if m not in VALID_METHODS]
            if bad:
                raise _bad_request(
                    "methods", f"unknown method(s) {bad}; valid: {', '.join(VALID_METHODS)}"
                )
        try:
            spec = SplitSpec(test_fraction=body.test_fraction, seed=body.seed)
        except InputError as e:
            raise _bad_request("test_fraction", str(e)) from None
        inflight_key = "cmp:" + json.dumps(
            {
                "dataset_id": body.dataset_id,
                "methods": body.methods,
                "seed": body.seed,
                "test_fraction": body.test_fraction,
                "folds": body.folds,
            },
            sort_keys=True,
        )
        with store._lock:
            if inflight_key in store.inflight:
                raise ApiError(409, "dataset_id", "an identical comparison is already in flight")
            store.inflight.add(inflight_key)
        report_id = store.new_id("rep")
        report_entry: dict = {"state": "pending", "report": None, "error": None}
        store.reports.put(report_id, report_entry)
        store.datasets.pin(body.dataset_id)

        def job():
            try:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore")
                    report = run_comparison(
                        entry["dataset"],
                        spec,
                        methods=body.methods,
                        folds=body.folds,
                        dataset_id=body.dataset_id,
                    )
                return report.to_dict()
            finally:
                store.datasets.unpin(body.dataset_id)

        fut = pool.submit(job)
        fut.add_done_callback(lambda f: _finish(report_entry, f, inflight_key, "report"))
        concurrent.futures.wait([fut], timeout=wait_seconds)
        if fut.done():
            _finish(report_entry, fut, inflight_key, "report")
        doc = {"report_id": report_id, "state": report_entry["state"]}
        if report_entry["state"] == "failed":
            doc["error"] = report_entry["error"]
        return doc

    @app.get(API_PREFIX + "/reports/{report_id}")
    def get_report(report_id: str):
        entry = store.reports.get(report_id)
        if entry is None:
            raise _not_found("report_id", f"unknown report {report_id!r}")
        doc: dict = {"report_id": report_id, "state": entry["state"]}
        if entry["state"] == "ready":
            doc["report"] = entry["report"]
        elif entry["state"] == "failed":
            doc["error"] = entry["error"]
        return doc

    resolved_ui = Path(ui_dir) if ui_dir else Path(__file__).resolve().parents[2] / "frontend" / "dist"
    if resolved_ui.is_dir():
        app.mount("/ui", StaticFiles(directory=str(resolved_ui), html=True), name="ui")

    return app
