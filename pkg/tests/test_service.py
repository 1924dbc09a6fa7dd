import json

import pytest
from fastapi.testclient import TestClient

from anonpipe.cli import main
from anonpipe.service import create_app


@pytest.fixture
def client():
    return TestClient(create_app())


@pytest.fixture
def sample_payload(repo_root):
    csv_text = (repo_root / "data" / "ms_covid_sample.csv").read_text()
    schema = json.loads(
        (repo_root / "data" / "ms_covid_sample.schema").read_text())
    return {"name": "ms_covid_sample", "csv": csv_text, "schema": schema}


@pytest.fixture
def session_id(client, sample_payload):
    response = client.post("/sessions", json=sample_payload)
    assert response.status_code == 201
    return response.json()["session_id"]


def test_upload_reports_shape(client, sample_payload):
    response = client.post("/sessions", json=sample_payload)
    assert response.status_code == 201
    body = response.json()
    assert body["row_count"] == 8
    assert body["attributes"][0] == "secret_name"


def test_upload_rejects_bad_csv(client, sample_payload):
    payload = dict(sample_payload, csv="a,b\n1")
    assert client.post("/sessions", json=payload).status_code == 400


def test_upload_rejects_missing_fields(client):
    assert client.post("/sessions", json={"csv": "a\n1"}).status_code == 400


def test_unknown_session_404(client):
    assert client.get("/sessions/nope/identification").status_code == 404
    assert client.delete("/sessions/nope").status_code == 404


def test_identification_matches_cli_bytes(client, session_id, repo_root,
                                          tmp_path):
    response = client.get(f"/sessions/{session_id}/identification",
                          params={"alpha": 25.0, "beta": 1.0})
    assert response.status_code == 200
    assert main([
        "identify",
        "--input", str(repo_root / "data" / "ms_covid_sample.csv"),
        "--schema", str(repo_root / "data" / "ms_covid_sample.schema"),
        "--alpha", "25", "--beta", "1", "--out", str(tmp_path)]) == 0
    assert response.content == (tmp_path /
                                "identification.report").read_bytes()


def test_invalid_thresholds_400(client, session_id):
    response = client.get(f"/sessions/{session_id}/identification",
                          params={"alpha": 1.0, "beta": 25.0})
    assert response.status_code == 400


def test_dimensions_need_rules(client, session_id):
    response = client.get(f"/sessions/{session_id}/dimensions")
    assert response.status_code == 422


def test_full_workflow_matches_cli(client, session_id, repo_root, tmp_path,
                                   sample_config_doc):
    rules_doc = json.loads(
        (repo_root / "rules" / "appendix4.rules").read_text())
    assert client.put(f"/sessions/{session_id}/rules",
                      json=rules_doc).status_code == 200

    dims = client.get(f"/sessions/{session_id}/dimensions")
    assert dims.status_code == 200
    again = client.get(f"/sessions/{session_id}/dimensions")
    assert again.content == dims.content  # cache determinism

    export = client.get(f"/sessions/{session_id}/export")
    assert export.status_code == 200

    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps(sample_config_doc(tmp_path / "out")))
    assert main(["run", "--config", str(config_path)]) == 0
    assert dims.content == (tmp_path / "out" /
                            "dimension.report").read_bytes()
    assert export.content == (tmp_path / "out" /
                              "anonymised.csv").read_bytes()


@pytest.fixture
def sample_config_doc(repo_root):
    def build(out_dir):
        return {
            "name": "ms_covid_sample",
            "input": {"csv": str(repo_root / "data" / "ms_covid_sample.csv")},
            "schema": str(repo_root / "data" / "ms_covid_sample.schema"),
            "thresholds": {"alpha_percent": 25.0, "beta_percent": 1.0},
            "rules": str(repo_root / "rules" / "appendix4.rules"),
            "constraints": {"k_min": 2, "l_min": 2, "t_max": 0.8},
            "policy": "max_nue",
            "output_dir": str(out_dir),
        }
    return build


def test_candidate_preview(client, session_id, repo_root):
    rules_doc = json.loads(
        (repo_root / "rules" / "appendix4.rules").read_text())
    client.put(f"/sessions/{session_id}/rules", json=rules_doc)
    response = client.get(f"/sessions/{session_id}/candidates/5/preview")
    assert response.status_code == 200
    body = response.json()
    assert body["d"] == 5
    assert len(body["rows"]) == 8  # sample has fewer than 20 rows
    assert client.get(
        f"/sessions/{session_id}/candidates/99/preview").status_code == 404


def test_put_rules_coverage_error_names_value(client, session_id):
    rules_doc = {"rules": [{
        "attribute": "age", "strategy": "generalize_numeric",
        "bins": [{"lower": 0, "upper": 30, "label": "0-30"}],
    }]}
    response = client.put(f"/sessions/{session_id}/rules", json=rules_doc)
    assert response.status_code == 422
    body = response.json()
    assert body["attribute"] == "age"
    assert body["value"] == "38"
    assert body["row"] == 1


def test_put_rules_unknown_attribute_400(client, session_id):
    rules_doc = {"rules": [{"attribute": "ghost", "strategy": "mask"}]}
    assert client.put(f"/sessions/{session_id}/rules",
                      json=rules_doc).status_code == 400


def test_put_overrides_validation(client, session_id):
    ok = client.put(f"/sessions/{session_id}/overrides",
                    json={"overrides": {"ms_type": "QID"}})
    assert ok.status_code == 200
    bad_label = client.put(f"/sessions/{session_id}/overrides",
                           json={"overrides": {"ms_type": "SECRET"}})
    assert bad_label.status_code == 400
    bad_attr = client.put(f"/sessions/{session_id}/overrides",
                          json={"overrides": {"ghost": "QID"}})
    assert bad_attr.status_code == 400


def test_override_mutation_invalidates_cache(client, session_id):
    first = client.get(f"/sessions/{session_id}/identification")
    client.put(f"/sessions/{session_id}/overrides",
               json={"overrides": {"ms_type": "NSA"}})
    second = client.get(f"/sessions/{session_id}/identification")
    assert first.content != second.content


def test_put_config_policy_and_thresholds(client, session_id):
    response = client.put(f"/sessions/{session_id}/config",
                          json={"policy": "smallest_d",
                                "thresholds": {"alpha_percent": 10.0,
                                               "beta_percent": 1.0}})
    assert response.status_code == 200
    assert response.json()["policy"] == "smallest_d"
    bad = client.put(f"/sessions/{session_id}/config",
                     json={"policy": "fastest"})
    assert bad.status_code == 400


def test_delete_session(client, session_id):
    assert client.delete(f"/sessions/{session_id}").status_code == 204
    assert client.get(
        f"/sessions/{session_id}/identification").status_code == 404


def test_upload_cap_413(sample_payload):
    app = create_app(upload_cap=100)
    client = TestClient(app)
    response = client.post("/sessions", json=sample_payload)
    assert response.status_code == 413


def test_sessions_expire(sample_payload):
    app = create_app(ttl=0.0)
    client = TestClient(app)
    created = client.post("/sessions", json=sample_payload)
    session_id = created.json()["session_id"]
    assert client.get(
        f"/sessions/{session_id}/identification").status_code == 404


def test_serves_built_ui_when_configured(repo_root):
    dist = repo_root / "frontend" / "dist"
    if not (dist / "index.html").exists():
        pytest.skip("web UI not built")
    client = TestClient(create_app(ui_dir=str(dist)))
    index = client.get("/")
    assert index.status_code == 200
    assert b"workbench" in index.content.lower()
    # API routes keep priority over the static mount
    assert client.get("/sessions/none/identification").status_code == 404
