import inspect
import math

import pytest
from fastapi.testclient import TestClient

from app import analysis_routes
from app.main import app
from app.models import SWEEP_COLUMNS


@pytest.fixture(scope="module")
def client():
    with TestClient(app) as c:
        yield c


def test_root(client):
    response = client.get("/")
    assert response.status_code == 200
    assert response.json()["status"] == "ok"


def test_teleport_classical(client):
    response = client.post("/teleport", json={"scheme": "classical", "alpha": [1.0, 1.0]})
    assert response.status_code == 200
    body = response.json()
    assert body["fidelity"] == pytest.approx(0.5, abs=1e-12)
    assert body["regime"] == "ClassicalBoundary"
    assert "eta_bob" not in body


def test_teleport_epr(client):
    response = client.post("/teleport", json={"r": 0.5 * math.log(2.0), "alpha": [0.0, 0.0]})
    assert response.status_code == 200
    body = response.json()
    assert body["n_x_out"] == pytest.approx(1.0, abs=1e-12)
    assert body["fidelity"] == pytest.approx(2.0 / 3.0, abs=1e-12)
    assert body["regime"] == "Secure"


@pytest.mark.parametrize(
    "payload",
    [
        {"eta_bob": 1.5},
        {"r": -1.0},
        {"gain": 0.0},
        {"scheme": "quantum"},
    ],
)
def test_teleport_rejects_invalid_request(client, payload):
    assert client.post("/teleport", json=payload).status_code == 422


def test_security(client):
    response = client.post("/security", json={"r": 2.0, "eta_alice": 0.3, "eta_bob": 0.3, "alpha": [1.0, 1.0]})
    assert response.status_code == 200
    body = response.json()
    assert body["eve_wins"] is True
    assert body["eta_crossover"] == pytest.approx(0.5, abs=1e-6)
    assert body["conditional_variance"] > 1.0
    assert body["conditional_crossover"] == pytest.approx(0.5, abs=1e-6)


def test_security_without_squeezing(client):
    response = client.post("/security", json={"r": 0.0, "conditional": False})
    assert response.status_code == 200
    body = response.json()
    assert body["eta_crossover"] is None
    assert body["eve_wins"] is False
    assert "conditional_variance" not in body


def test_sweep(client):
    payload = {"r_values": [0.0, 1.0], "eta_values": [0.4, 1.0], "gain_values": [1.0], "mc_samples": 1000, "seed": 3}
    response = client.post("/sweep", json=payload)
    assert response.status_code == 200
    rows = response.json()
    assert len(rows) == 4
    assert tuple(rows[0]) == SWEEP_COLUMNS
    assert [(row["r"], row["eta_bob"]) for row in rows] == [(0.0, 0.4), (0.0, 1.0), (1.0, 0.4), (1.0, 1.0)]
    assert rows[1]["regime"] == "ClassicalBoundary"


def test_sweep_rejects_bad_grid(client):
    response = client.post("/sweep", json={"r_values": [0.5], "eta_values": [1.2]})
    assert response.status_code == 422


def test_fidelity(client):
    payload = {
        "guess": {"mean_x": 1.0, "mean_y": 1.0, "n_x": 2.0, "n_y": 2.0},
        "alpha": [1.0, 1.0],
        "n": 100_000,
        "seed": 9,
    }
    response = client.post("/fidelity", json=payload)
    assert response.status_code == 200
    body = response.json()
    assert body["closed_form"] == pytest.approx(0.5, abs=1e-12)
    assert abs(body["monte_carlo"] - body["closed_form"]) <= 4 * body["std_error"]


def test_fidelity_rejects_small_sample(client):
    payload = {"guess": {"mean_x": 0.0, "mean_y": 0.0, "n_x": 1.0, "n_y": 1.0}, "n": 10}
    assert client.post("/fidelity", json=payload).status_code == 422


def test_compute_handlers_run_off_the_event_loop():
    for handler in (analysis_routes.teleport, analysis_routes.security, analysis_routes.fidelity):
        assert not inspect.iscoroutinefunction(handler)
