"""HTTP service: endpoint behavior, validation shape, async states, LRU store."""

import concurrent.futures
import threading
import time
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from perfmodel.dataset import CsvSchema, ensure_normalized, load_csv_text, synth_generate, write_csv
from perfmodel.model import SelectionParams, fit_all, model_set_to_dict
from perfmodel.service import LruStore, create_app
from conftest import planted_spec

API = "/api/v1"


@pytest.fixture(scope="module")
def csv_path(tmp_path_factory):
    d = synth_generate(planted_spec(n_samples=80))
    p = tmp_path_factory.mktemp("svc") / "planted.csv"
    write_csv(d, p)
    return p


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


@pytest.fixture(scope="module")
def ds_id(client, csv_path):
    resp = client.post(API + "/datasets", content=csv_path.read_bytes())
    assert resp.status_code == 200
    return resp.json()["id"]


@pytest.fixture(scope="module")
def model_id(client, ds_id):
    resp = client.post(API + "/models", json={"dataset_id": ds_id})
    assert resp.status_code == 200
    doc = resp.json()
    assert doc["state"] == "ready"
    return doc["model_id"]


def test_health(client):
    resp = client.get(API + "/health")
    assert resp.status_code == 200
    assert resp.text == "ok"


# --- datasets ----------------------------------------------------------------------


def test_upload_summary(client, csv_path):
    resp = client.post(API + "/datasets", content=csv_path.read_bytes())
    assert resp.status_code == 200
    doc = resp.json()
    assert doc["n_samples"] == 80
    assert "TOT_CYC" in doc["counters"] and "c01" in doc["counters"]
    assert doc["targets"] == ["runtime_s", "node_power_w", "cpu_power_w", "mem_power_w"]


def test_upload_rejects_garbage(client):
    resp = client.post(API + "/datasets", content=b"not,a,valid\nheader")
    assert resp.status_code == 400
    detail = resp.json()["detail"]
    assert detail[0]["field"] == "body"

    resp = client.post(API + "/datasets", content=b"\xff\xfe\x00\x01")
    assert resp.status_code == 400


# --- models ------------------------------------------------------------------------


def test_fit_summary_shape(client, ds_id):
    doc = client.post(API + "/models", json={"dataset_id": ds_id}).json()
    assert doc["state"] == "ready"
    summary = doc["summary"]
    assert set(summary) == {"runtime_s", "node_power_w", "cpu_power_w", "mem_power_w"}
    assert set(summary["runtime_s"]["selected_counters"]) >= {"c01", "c02"}
    assert summary["runtime_s"]["r2"] > 0.99


def test_model_matches_direct_fit(client, model_id, csv_path):
    got = client.get(API + f"/models/{model_id}").json()
    assert got["state"] == "ready"
    raw = load_csv_text(csv_path.read_text(), CsvSchema(require_targets=False), origin="t")
    direct = fit_all(ensure_normalized(raw), SelectionParams())
    assert got["model"] == model_set_to_dict(direct)


def test_fit_unknown_dataset(client):
    resp = client.post(API + "/models", json={"dataset_id": "ds-9999"})
    assert resp.status_code == 404
    assert resp.json()["detail"][0]["field"] == "dataset_id"


def test_fit_bad_params(client, ds_id):
    resp = client.post(
        API + "/models",
        json={"dataset_id": ds_id, "params": {"relevance_threshold": 2.0}},
    )
    assert resp.status_code == 400
    assert resp.json()["detail"][0]["field"] == "params"


def test_missing_body_field_reports_path(client):
    resp = client.post(API + "/predict", json={"samples": []})
    assert resp.status_code == 400
    fields = [d["field"] for d in resp.json()["detail"]]
    assert "model_id" in fields


def test_get_model_unknown(client):
    resp = client.get(API + "/models/mdl-9999")
    assert resp.status_code == 404


# --- predict -----------------------------------------------------------------------


def sample_payload(d, i, with_targets=True):
    s = d.samples[i]
    body = {"counters": dict(s.counters), "cpu_freq_ghz": s.cpu_freq_ghz}
    if with_targets:
        body["targets"] = dict(s.targets)
    return body


@pytest.fixture(scope="module")
def planted80():
    return synth_generate(planted_spec(n_samples=80))


def test_predict_training_rows(client, model_id, planted80):
    body = {
        "model_id": model_id,
        "samples": [sample_payload(planted80, 0), sample_payload(planted80, 1, with_targets=False)],
    }
    resp = client.post(API + "/predict", json=body)
    assert resp.status_code == 200
    rows = resp.json()["predictions"]
    assert len(rows) == 2
    first = rows[0]["runtime_s"]
    assert first["prediction"] == pytest.approx(planted80.samples[0].targets["runtime_s"], rel=0.01)
    assert abs(first["error_percent"]) < 1.0
    assert rows[1]["runtime_s"]["error_percent"] is None


def test_predict_rejects_bad_samples(client, model_id):
    resp = client.post(API + "/predict", json={"model_id": model_id, "samples": []})
    assert resp.status_code == 400
    assert resp.json()["detail"][0]["field"] == "samples"

    body = {"model_id": model_id, "samples": [{"counters": {"c01": 0.5}, "cpu_freq_ghz": 2.0}]}
    resp = client.post(API + "/predict", json=body)
    assert resp.status_code == 400
    assert resp.json()["detail"][0]["field"] == "samples[0]"

    body = {
        "model_id": model_id,
        "samples": [{"counters": {"TOT_CYC": 0.0, "c01": 0.5}, "cpu_freq_ghz": 2.0}],
    }
    resp = client.post(API + "/predict", json=body)
    assert resp.status_code == 400
    assert resp.json()["detail"][0]["field"] == "samples[0].counters.TOT_CYC"


def test_predict_unknown_model(client):
    resp = client.post(
        API + "/predict",
        json={"model_id": "mdl-404", "samples": [{"counters": {}, "cpu_freq_ghz": 2.0}]},
    )
    assert resp.status_code == 404


# --- whatif ------------------------------------------------------------------------


def test_whatif_delta_zero(client, model_id, ds_id):
    body = {"model_id": model_id, "dataset_id": ds_id, "counter": "c01", "delta_percent": 0.0}
    resp = client.post(API + "/whatif", json=body)
    assert resp.status_code == 200
    doc = resp.json()
    assert doc["pivot_counter"] == "c01"
    for outcome in doc["metrics"].values():
        assert outcome["improvement_percent"] == 0.0


def test_whatif_reduction_improves(client, model_id, ds_id):
    body = {"model_id": model_id, "dataset_id": ds_id, "counter": "c01", "delta_percent": -30.0}
    doc = client.post(API + "/whatif", json=body).json()
    for outcome in doc["metrics"].values():
        assert outcome["improvement_percent"] > 0.0


def test_whatif_validation(client, model_id, ds_id):
    base = {"model_id": model_id, "dataset_id": ds_id, "counter": "c01", "delta_percent": -30.0}
    resp = client.post(API + "/whatif", json=dict(base, counter="zz99"))
    assert resp.status_code == 400
    assert resp.json()["detail"][0]["field"] == "counter"

    resp = client.post(API + "/whatif", json=dict(base, delta_percent=-100.0))
    assert resp.status_code == 400
    assert resp.json()["detail"][0]["field"] == "delta_percent"

    resp = client.post(API + "/whatif", json=dict(base, dataset_id="ds-404"))
    assert resp.status_code == 404


# --- compare -----------------------------------------------------------------------


def test_compare_roundtrip(client, ds_id):
    body = {"dataset_id": ds_id, "methods": ["counter_model", "ridge"], "seed": 3456}
    resp = client.post(API + "/compare", json=body)
    assert resp.status_code == 200
    doc = resp.json()
    assert doc["state"] == "ready"
    report = client.get(API + f"/reports/{doc['report_id']}").json()
    assert report["state"] == "ready"
    rep = report["report"]
    assert rep["format"] == "perfmodel-comparison-report"
    assert set(rep["cells"]) == {"counter_model", "ridge"}
    assert set(rep["cells"]["ridge"]) == set(rep["targets"])
    assert rep["split"]["seed"] == 3456


def test_compare_validation(client, ds_id):
    resp = client.post(API + "/compare", json={"dataset_id": ds_id, "methods": ["svm"]})
    assert resp.status_code == 400
    assert resp.json()["detail"][0]["field"] == "methods"

    resp = client.post(API + "/compare", json={"dataset_id": ds_id, "test_fraction": 1.5})
    assert resp.status_code == 400
    assert resp.json()["detail"][0]["field"] == "test_fraction"

    resp = client.get(API + "/reports/rep-404")
    assert resp.status_code == 404


# --- async states and duplicate suppression ----------------------------------------


class GatedExecutor(concurrent.futures.ThreadPoolExecutor):
    """Holds every submitted job until the gate opens."""

    def __init__(self):
        super().__init__(max_workers=2)
        self.gate = threading.Event()

    def submit(self, fn, *args, **kwargs):
        def waiting():
            assert self.gate.wait(10.0)
            return fn(*args, **kwargs)

        return super().submit(waiting)


def poll_until_done(client, url, timeout=5.0):
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        doc = client.get(url).json()
        if doc["state"] != "pending":
            return doc
        time.sleep(0.02)
    raise AssertionError(f"{url} still pending after {timeout}s")


def test_pending_then_ready_and_duplicate_409(csv_path):
    gated = GatedExecutor()
    client = TestClient(create_app(wait_seconds=0.0, executor=gated))
    ds = client.post(API + "/datasets", content=csv_path.read_bytes()).json()["id"]

    first = client.post(API + "/models", json={"dataset_id": ds})
    assert first.status_code == 200
    doc = first.json()
    assert doc["state"] == "pending" and "summary" not in doc

    # identical request while the first is in flight
    dup = client.post(API + "/models", json={"dataset_id": ds})
    assert dup.status_code == 409

    # different params are not a duplicate
    other = client.post(
        API + "/models",
        json={"dataset_id": ds, "params": {"max_counters": 3}},
    )
    assert other.status_code == 200

    # predicting against a pending model is a conflict, not an error
    pending_predict = client.post(
        API + "/predict",
        json={"model_id": doc["model_id"], "samples": [{"counters": {}, "cpu_freq_ghz": 2.0}]},
    )
    assert pending_predict.status_code == 409

    gated.gate.set()
    final = poll_until_done(client, API + f"/models/{doc['model_id']}")
    assert final["state"] == "ready"
    assert "model" in final

    # once finished, the same request is admissible again (no 409)
    again = client.post(API + "/models", json={"dataset_id": ds})
    assert again.status_code == 200
    assert poll_until_done(client, API + f"/models/{again.json()['model_id']}")["state"] == "ready"


def test_compare_pending_state(csv_path):
    gated = GatedExecutor()
    client = TestClient(create_app(wait_seconds=0.0, executor=gated))
    ds = client.post(API + "/datasets", content=csv_path.read_bytes()).json()["id"]
    doc = client.post(
        API + "/compare", json={"dataset_id": ds, "methods": ["ridge"]}
    ).json()
    assert doc["state"] == "pending"
    report = client.get(API + f"/reports/{doc['report_id']}").json()
    assert report["state"] == "pending" and "report" not in report
    gated.gate.set()
    final = poll_until_done(client, API + f"/reports/{doc['report_id']}")
    assert final["state"] == "ready"
    assert set(final["report"]["cells"]) == {"ridge"}


# --- LRU store ---------------------------------------------------------------------


def test_lru_evicts_least_recent():
    store = LruStore(2)
    store.put("a", {"v": 1})
    store.put("b", {"v": 2})
    assert store.get("a") == {"v": 1}  # refresh a
    store.put("c", {"v": 3})
    assert "b" not in store
    assert "a" in store and "c" in store


def test_lru_pins_survive_eviction():
    store = LruStore(1)
    store.put("a", {})
    store.pin("a")
    store.put("b", {})
    # a is protected, so the unpinned newcomer is the only candidate
    assert "a" in store and "b" not in store
    # fully pinned store overflows rather than evicting
    store.pin("c")
    store.put("c", {})
    assert "a" in store and "c" in store
    store.unpin("a")
    store.put("d", {})
    assert "a" not in store


def test_dataset_eviction_via_endpoints(csv_path):
    client = TestClient(create_app(capacity=2))
    ids = [
        client.post(API + "/datasets", content=csv_path.read_bytes()).json()["id"]
        for _ in range(3)
    ]
    resp = client.post(API + "/models", json={"dataset_id": ids[0]})
    assert resp.status_code == 404
    resp = client.post(API + "/models", json={"dataset_id": ids[2]})
    assert resp.status_code == 200


# --- preloading and UI -------------------------------------------------------------


def test_data_dir_preload(tmp_path, csv_path):
    (tmp_path / "bench.csv").write_bytes(csv_path.read_bytes())
    client = TestClient(create_app(data_dir=str(tmp_path)))
    resp = client.post(API + "/models", json={"dataset_id": "bench"})
    assert resp.status_code == 200
    assert resp.json()["state"] == "ready"


UI_DIST = Path(__file__).resolve().parents[1] / "frontend" / "dist"


@pytest.mark.skipif(not (UI_DIST / "index.html").exists(), reason="frontend is not built")
def test_ui_is_served(client):
    resp = client.get("/ui/")
    assert resp.status_code == 200
    assert "text/html" in resp.headers["content-type"]
