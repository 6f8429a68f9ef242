import pytest
from fastapi.testclient import TestClient

from backend.main import app


@pytest.fixture
def client():
    return TestClient(app)


class TestBackend:
    def test_root(self, client):
        response = client.get("/")
        assert response.status_code == 200
        assert response.json()["status"] == "running"

    def test_status(self, client):
        body = client.get("/status").json()
        assert "shap-global" in body["explain_kinds"]
        assert body["controllers"] == ["baseline", "policy", "random"]

    def test_scenarios(self, client):
        scenarios = {s["name"]: s for s in client.get("/scenarios").json()["scenarios"]}
        assert set(scenarios) == {"1C1F", "3C1F", "3C3F", "3C5F"}
        assert scenarios["3C5F"]["obs_dim"] == 9

    def test_simulate(self, client, tmp_path):
        response = client.post("/simulate", json={"scenario": "3C1F", "steps": 12, "out": str(tmp_path)})
        assert response.status_code == 200
        body = response.json()
        assert body["summary"]["steps"] == 12
        assert "trajectory.csv" in body["artifacts"]

    def test_explain_with_missing_policy(self, client, tmp_path):
        response = client.post("/explain", json={"kind": "perturb", "policy": str(tmp_path / "missing.pt"),
                                                 "out": str(tmp_path)})
        assert response.status_code == 422

    def test_explain(self, client, tmp_path, zero_policy_file):
        response = client.post("/explain", json={
            "kind": "shap-case", "policy": str(zero_policy_file), "out": str(tmp_path / "run"),
            "explain": {"n_background": 16},
        })
        assert response.status_code == 200
        assert response.json()["summary"]["cases"][0] == "p_min/0%"

    def test_invalid_step_count_is_rejected(self, client):
        response = client.post("/simulate", json={"steps": 0})
        assert response.status_code == 422
