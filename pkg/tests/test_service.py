"""HTTP facade tests, run in-process against a temporary campaign directory."""

import numpy as np
import pytest
from fastapi.testclient import TestClient

from boat.campaign import ask as ask_state
from boat.service import create_app
from boat.storage import load_campaign_file

SPACE = {
    "variables": [
        {"name": "temp", "lower": 100.0, "upper": 300.0, "unit": "C"},
        {"name": "rate", "lower": 0.5, "upper": 2.0, "unit": "mm/s"},
    ]
}


@pytest.fixture
def client(tmp_path):
    app = create_app(tmp_path)
    with TestClient(app) as c:
        c.campaign_dir = tmp_path
        yield c


def create_campaign(client, **overrides):
    body = {"space": SPACE, "seed": 7}
    body.update(overrides)
    response = client.post("/campaigns", json=body)
    assert response.status_code == 201, response.text
    return response.json()["data"]["id"]


def tell_rows(client, cid, rows, revision=None):
    body = {"rows": rows}
    if revision is not None:
        body["revision"] = revision
    return client.post(f"/campaigns/{cid}/tell", json=body)


def seeded_rows(n):
    rng = np.random.default_rng(3)
    rows = []
    for _ in range(n):
        temp = float(rng.uniform(100, 300))
        rate = float(rng.uniform(0.5, 2.0))
        y = -((temp - 220.0) / 100.0) ** 2 - (rate - 1.2) ** 2
        rows.append({"temp": temp, "rate": rate, "y": round(y, 6)})
    return rows


class TestCreateAndGet:
    def test_create_returns_summary_envelope(self, client):
        response = client.post("/campaigns", json={"space": SPACE})
        assert response.status_code == 201
        doc = response.json()
        assert doc["ok"] is True
        assert doc["revision"] == 0
        data = doc["data"]
        assert data["n"] == 0
        assert data["output_names"] == ["y"]
        assert [v["name"] for v in data["space"]["variables"]] == ["temp", "rate"]

    def test_create_missing_space_names_field(self, client):
        response = client.post("/campaigns", json={})
        assert response.status_code == 422
        error = response.json()["error"]
        assert error["code"] == "validation"
        assert "space" in error["message"]

    def test_create_bad_variable_field_named(self, client):
        bad = {"variables": [{"name": "temp", "lower": 1.0}]}
        response = client.post("/campaigns", json={"space": bad})
        assert response.status_code == 422
        assert "variables[0].upper" in response.json()["error"]["message"]

    def test_get_unknown_campaign_404(self, client):
        response = client.get("/campaigns/deadbeef0000")
        assert response.status_code == 404
        doc = response.json()
        assert doc["ok"] is False
        assert doc["error"]["code"] == "not_found"

    def test_get_round_trips_summary(self, client):
        cid = create_campaign(client)
        doc = client.get(f"/campaigns/{cid}").json()
        assert doc["ok"] is True
        assert doc["data"]["id"] == cid
        assert doc["data"]["incumbent"] is None

    def test_constraint_and_sense_setup(self, client):
        cid = create_campaign(
            client,
            objectives=[{"name": "strength", "sense": "minimize"}],
            constraints=[{"name": "porosity", "threshold": 0.05}],
        )
        data = client.get(f"/campaigns/{cid}").json()["data"]
        assert data["objectives"][0]["sense"] == "minimize"
        assert data["constraints"][0] == {
            "name": "porosity",
            "threshold": 0.05,
            "direction": "le",
            "output_index": 1,
        }


class TestAsk:
    def test_batch_of_two_in_bounds_with_revision_echo(self, client):
        cid = create_campaign(client)
        response = client.post(f"/campaigns/{cid}/ask", json={"q": 2})
        assert response.status_code == 200, response.text
        doc = response.json()
        assert doc["revision"] == 1
        points = doc["data"]["points"]
        assert len(points) == 2
        for temp, rate in points:
            assert 100.0 <= temp <= 300.0
            assert 0.5 <= rate <= 2.0

    def test_http_ask_matches_library_ask(self, client):
        cid = create_campaign(client)
        assert tell_rows(client, cid, seeded_rows(4)).status_code == 200
        state = load_campaign_file(client.campaign_dir / f"{cid}.json")

        response = client.post(f"/campaigns/{cid}/ask", json={"q": 2, "seed": 77})
        http_points = response.json()["data"]["points"]

        _, lib_points = ask_state(state, q=2, seed=77)
        assert http_points == lib_points.tolist()

    def test_unknown_campaign_404(self, client):
        response = client.post("/campaigns/feedface0000/ask", json={})
        assert response.status_code == 404

    def test_bad_strategy_422(self, client):
        cid = create_campaign(client)
        response = client.post(
            f"/campaigns/{cid}/ask", json={"strategy": "grid_search"}
        )
        assert response.status_code == 422
        assert "strategy" in response.json()["error"]["message"]

    def test_bad_q_422(self, client):
        cid = create_campaign(client)
        response = client.post(f"/campaigns/{cid}/ask", json={"q": 0})
        assert response.status_code == 422

    def test_request_id_replays_without_reacting(self, client):
        cid = create_campaign(client)
        first = client.post(
            f"/campaigns/{cid}/ask", json={"q": 2, "request_id": "retry-1"}
        )
        second = client.post(
            f"/campaigns/{cid}/ask", json={"q": 2, "request_id": "retry-1"}
        )
        assert first.json() == second.json()
        state = load_campaign_file(client.campaign_dir / f"{cid}.json")
        assert state.revision == 1
        assert len(state.pending) == 2


class TestTell:
    def test_rows_recorded_and_trace_monotone(self, client):
        cid = create_campaign(client)
        response = tell_rows(client, cid, seeded_rows(5))
        assert response.status_code == 200, response.text
        doc = response.json()
        assert doc["data"]["n"] == 5
        assert doc["revision"] == 1
        trace = doc["data"]["trace"]
        assert len(trace) == 5
        assert all(b >= a for a, b in zip(trace, trace[1:]))

    def test_stale_revision_conflicts_with_current(self, client):
        cid = create_campaign(client)
        assert tell_rows(client, cid, seeded_rows(2), revision=0).status_code == 200
        response = tell_rows(client, cid, seeded_rows(1), revision=0)
        assert response.status_code == 409
        doc = response.json()
        assert doc["ok"] is False
        assert doc["error"]["code"] == "conflict"
        assert doc["revision"] == 1

    def test_missing_cell_names_row_and_column(self, client):
        cid = create_campaign(client)
        rows = [{"temp": 150.0, "rate": 1.0}]
        response = tell_rows(client, cid, rows)
        assert response.status_code == 422
        assert "rows[0].y" in response.json()["error"]["message"]

    def test_out_of_bounds_row_rejected(self, client):
        cid = create_campaign(client)
        rows = [{"temp": 9999.0, "rate": 1.0, "y": 0.0}]
        response = tell_rows(client, cid, rows)
        assert response.status_code == 422
        assert response.json()["error"]["code"] == "validation"

    def test_request_id_replays_tell(self, client):
        cid = create_campaign(client)
        rows = seeded_rows(2)
        first = tell_rows_with_id(client, cid, rows, "tell-9")
        second = tell_rows_with_id(client, cid, rows, "tell-9")
        assert first.json() == second.json()
        assert load_campaign_file(client.campaign_dir / f"{cid}.json").n_observed == 2


def tell_rows_with_id(client, cid, rows, request_id):
    return client.post(
        f"/campaigns/{cid}/tell", json={"rows": rows, "request_id": request_id}
    )


class TestRecommendAndPareto:
    def test_recommend_returns_rows(self, client):
        cid = create_campaign(client)
        tell_rows(client, cid, seeded_rows(4))
        doc = client.get(f"/campaigns/{cid}/recommend").json()
        assert doc["ok"] is True
        data = doc["data"]
        assert data["columns"] == ["temp", "rate", "y"]
        assert len(data["rows"]) == len(data["indices"]) == 1

    def test_recommend_empty_campaign_422(self, client):
        cid = create_campaign(client)
        response = client.get(f"/campaigns/{cid}/recommend")
        assert response.status_code == 422
        assert response.json()["error"]["code"] == "insufficient_data"

    def test_pareto_single_objective_422(self, client):
        cid = create_campaign(client)
        tell_rows(client, cid, seeded_rows(2))
        response = client.get(f"/campaigns/{cid}/pareto")
        assert response.status_code == 422

    def test_pareto_two_objectives(self, client):
        cid = create_campaign(
            client,
            objectives=[{"name": "a"}, {"name": "b", "sense": "minimize"}],
        )
        rows = [
            {"temp": 120.0, "rate": 0.6, "a": 1.0, "b": 1.0},
            {"temp": 200.0, "rate": 1.0, "a": 2.0, "b": 2.0},
            {"temp": 280.0, "rate": 1.8, "a": 0.5, "b": 3.0},
        ]
        tell_rows(client, cid, rows)
        doc = client.get(f"/campaigns/{cid}/pareto").json()
        assert doc["data"]["indices"] == [0, 1]
        summary = client.get(f"/campaigns/{cid}").json()["data"]
        assert summary["pareto"] == [0, 1]
        assert summary["trace"] == [None, None, None]


class TestSlice:
    def test_band_brackets_mean_pointwise(self, client):
        cid = create_campaign(client)
        tell_rows(client, cid, seeded_rows(5))
        response = client.get(f"/campaigns/{cid}/slice?dim=0&points=50")
        assert response.status_code == 200, response.text
        data = response.json()["data"]
        assert (
            len(data["grid"])
            == len(data["mean"])
            == len(data["lower"])
            == len(data["upper"])
            == 50
        )
        for lo, mid, hi in zip(data["lower"], data["mean"], data["upper"]):
            assert lo <= mid <= hi
        assert data["grid"][0] == 100.0
        assert data["grid"][-1] == 300.0
        assert data["name"] == "temp"

    def test_anchor_is_best_observed_row(self, client):
        cid = create_campaign(client)
        rows = seeded_rows(5)
        tell_rows(client, cid, rows)
        best = max(rows, key=lambda r: r["y"])
        data = client.get(f"/campaigns/{cid}/slice?dim=1").json()["data"]
        assert data["anchor"] == [best["temp"], best["rate"]]

    def test_dim_out_of_range_422(self, client):
        cid = create_campaign(client)
        tell_rows(client, cid, seeded_rows(3))
        response = client.get(f"/campaigns/{cid}/slice?dim=2")
        assert response.status_code == 422
        assert "dim" in response.json()["error"]["message"]

    def test_needs_two_observations(self, client):
        cid = create_campaign(client)
        tell_rows(client, cid, seeded_rows(1))
        response = client.get(f"/campaigns/{cid}/slice?dim=0")
        assert response.status_code == 422
        assert response.json()["error"]["code"] == "insufficient_data"
