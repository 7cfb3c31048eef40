from pathlib import Path
import sys

import pytest

PROJECT_ROOT = Path(__file__).resolve().parents[2]
PACKAGE_ROOT = PROJECT_ROOT / "QueryLab"
if str(PACKAGE_ROOT) not in sys.path:
    sys.path.insert(0, str(PACKAGE_ROOT))

pytest.importorskip("httpx")

from fastapi.testclient import TestClient

from querylab.api import app

client = TestClient(app)


def test_algorithms_endpoint_lists_registry():
    response = client.get("/algorithms")
    assert response.status_code == 200
    names = {entry["name"] for entry in response.json()}
    assert names == {"mwu", "zerosum-wsne", "bbm", "ks", "ks-zero-one", "uniform-sampler"}


def test_verify_endpoint_reports_exact_regrets():
    response = client.post(
        "/verify",
        json={
            "row_payoffs": [[1, 0], [0, 1]],
            "col_payoffs": [[0, 1], [1, 0]],
            "row_strategy": [0.5, 0.5],
            "col_strategy": [0.5, 0.5],
            "eps": 0.01,
        },
    )
    assert response.status_code == 200
    payload = response.json()
    assert payload["report"]["row_regret"] == 0.0
    assert payload["is_eps_ne"] is True


def test_verify_endpoint_rejects_bad_profiles():
    response = client.post(
        "/verify",
        json={
            "row_payoffs": [[1, 0], [0, 1]],
            "col_payoffs": [[0, 1], [1, 0]],
            "row_strategy": [0.7, 0.7],
            "col_strategy": [0.5, 0.5],
        },
    )
    assert response.status_code == 400


def test_solve_endpoint_runs_and_verifies():
    response = client.get("/solve", params={"algorithm": "bbm", "k": 4, "eps": 0.5, "seed": 1})
    assert response.status_code == 200
    payload = response.json()
    assert payload["algorithm"] == "bbm"
    assert payload["completed"] is True
    assert payload["queries"] > 0
    assert len(payload["profile"]["row_strategy"]) == 4


def test_solve_endpoint_rejects_unknown_inputs():
    assert client.get("/solve", params={"algorithm": "bbm", "generator": "poker"}).status_code == 400
    assert client.get("/solve", params={"algorithm": "simplex"}).status_code == 400
    assert client.get("/solve", params={"algorithm": "mwu", "generator": "uniform"}).status_code == 400
