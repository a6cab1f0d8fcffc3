import pytest
from fastapi.testclient import TestClient

import main
from src.models import BranchRecord, SyntheticSpec, TraceMeta
from src.trace_io import write_trace
from src.trace_store import TraceStore

SPEC = SyntheticSpec.uniform(8, 0.95, 4000, rng_seed=2).model_dump()
SMALL_PREDICTORS = [{"kind": "smith"}, {"kind": "tage", "tagged_index_bits": 8}]


@pytest.fixture
def store(store_dir):
    return TraceStore(str(store_dir))


@pytest.fixture
def client(store):
    main.app.dependency_overrides[main.get_store] = lambda: store
    yield TestClient(main.app)
    main.app.dependency_overrides.clear()


def _generate(client, trace_id, source_tag="synthetic", spec=SPEC):
    return client.post("/api/traces/generate", json={"trace_id": trace_id, "source_tag": source_tag, "spec": spec})


def test_health(client):
    assert client.get("/").json()["status"] == "healthy"
    assert client.get("/health").json() == {"status": "healthy", "service": "bwset-api"}


def test_generate_and_list(client):
    response = _generate(client, "g1", "web")
    assert response.status_code == 200
    assert response.json()["trace"] == {"trace_id": "g1", "record_count": 4000, "source_tag": "web"}
    assert client.get("/api/traces").json() == [{"trace_id": "g1", "record_count": 4000, "source_tag": "web"}]


def test_generate_duplicate_id(client):
    assert _generate(client, "g1").status_code == 200
    assert _generate(client, "g1").status_code == 400


def test_generate_invalid_spec(client):
    bad = dict(SPEC, bias_per_branch=[0.5])
    assert _generate(client, "bad", spec=bad).status_code == 422


def test_upload_bwt(client, tmp_path):
    path = tmp_path / "up.bwt"
    records = [BranchRecord(0x400, i % 3 != 0) for i in range(300)]
    write_trace(records, TraceMeta(trace_id="up", record_count=300), path)
    response = client.post("/api/traces/upload", files={"file": ("up.bwt", path.read_bytes())},
                           data={"source_tag": "db"})
    assert response.status_code == 200
    assert response.json()["trace"]["record_count"] == 300


def test_upload_csv(client, store):
    body = b"pc,taken\n0x400,1\n0x404,0\n"
    response = client.post("/api/traces/upload", files={"file": ("hand.csv", body)})
    assert response.status_code == 200
    meta, records = store.get("hand")
    assert records == [BranchRecord(0x400, True), BranchRecord(0x404, False)]


@pytest.mark.parametrize("filename, body", [
    ("bad.bwt", b"NOTATRACE" + bytes(20)),
    ("bad.csv", b"address,taken\n0x400,1\n"),
    ("extra.bwt", b"BWTRACE1" + (1).to_bytes(8, "little") + bytes(18)),
    ("bad.txt", b"whatever"),
])
def test_upload_rejects_malformed(client, filename, body):
    response = client.post("/api/traces/upload", files={"file": (filename, body)})
    assert response.status_code == 400
    assert client.get("/api/traces").json() == []


def test_delete_and_clear(client):
    _generate(client, "a")
    _generate(client, "b")
    assert client.delete("/api/traces/a").status_code == 200
    assert client.delete("/api/traces/a").status_code == 404
    assert client.delete("/api/traces/clear/all").json()["message"] == "Removed 1 traces"
    assert client.get("/api/traces").json() == []


def test_characterize(client):
    _generate(client, "c1", "web")
    response = client.post("/api/characterize", json={
        "trace_id": "c1",
        "profile": {"mode": "global", "N": 8},
        "predictors": SMALL_PREDICTORS,
    })
    assert response.status_code == 200
    payload = response.json()
    assert payload["summary"]["trace_id"] == "c1"
    assert payload["summary"]["source_tag"] == "web"
    assert payload["summary"]["config"]["global_history"] == 8
    assert payload["summary"]["reference_predictor"] == "tage"
    assert [result["predictor"] for result in payload["results"]] == ["smith", "tage"]


def test_characterize_unknown_trace(client):
    assert client.post("/api/characterize", json={"trace_id": "nope"}).status_code == 404


def test_characterize_bad_reference(client):
    _generate(client, "c1")
    response = client.post("/api/characterize", json={
        "trace_id": "c1", "predictors": SMALL_PREDICTORS, "reference_predictor": "gshare"})
    assert response.status_code == 400


def test_characterize_rejects_grid_violation(client):
    _generate(client, "c1")
    response = client.post("/api/characterize", json={"trace_id": "c1", "profile": {"mode": "global", "N": 9}})
    assert response.status_code == 422


@pytest.mark.parametrize("endpoint, payload", [
    ("/api/characterize", {"trace_id": "c1"}),
    ("/api/report", {"trace_ids": ["c1"]}),
])
def test_duplicate_predictor_labels_rejected(client, endpoint, payload):
    _generate(client, "c1")
    twins = [{"kind": "tage", "tagged_index_bits": 8}, {"kind": "tage", "tagged_index_bits": 9}]
    response = client.post(endpoint, json={**payload, "predictors": twins})
    assert response.status_code == 422
    assert "unique" in response.text

    named = [{**twins[0], "name": "tage_small"}, {**twins[1], "name": "tage_large"}]
    assert client.post(endpoint, json={**payload, "predictors": named}).status_code == 200


def test_report(client):
    for i, bias in enumerate([0.6, 0.8, 0.99]):
        _generate(client, f"r{i}", spec=SyntheticSpec.uniform(8, bias, 3000, rng_seed=i).model_dump())
    response = client.post("/api/report", json={
        "trace_ids": ["r0", "r1", "r2"],
        "profile": {"mode": "pc"},
        "predictors": SMALL_PREDICTORS,
    })
    assert response.status_code == 200
    report = response.json()
    assert report["trace_count"] == 3
    assert sum(row["trace_count"] for row in report["per_pred_bin"]) == 3
    assert report["spearman_pred_mpkb"]["tage"] < 0


def test_report_unknown_trace(client):
    _generate(client, "r0")
    response = client.post("/api/report", json={"trace_ids": ["r0", "ghost"]})
    assert response.status_code == 404
