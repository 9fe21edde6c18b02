"""
Tests for the HTTP routes
"""
import pytest
from fastapi.testclient import TestClient

from conftest import one_zone_document
from app.main import app

client = TestClient(app)

QUICK = {"warmup_days": 0}


class TestService:
    def test_health(self):
        response = client.get("/health")
        assert response.status_code == 200
        assert response.json() == {"status": "healthy"}

    def test_root(self):
        assert client.get("/").json()["docs"] == "/docs"


class TestBuildings:
    def test_case_study(self):
        body = client.get("/api/v1/buildings/case-study").json()
        assert [zone["name"] for zone in body["zones"]] == ["ground_floor", "east_floor", "west_floor"]

    def test_validate_valid(self):
        body = client.post("/api/v1/buildings/validate", json=one_zone_document()).json()
        assert body == {"valid": True, "diagnostics": []}

    def test_validate_invalid(self):
        document = one_zone_document()
        document["interzones"][0]["side_a"] = "attic"
        response = client.post("/api/v1/buildings/validate", json=document)
        assert response.status_code == 200
        body = response.json()
        assert body["valid"] is False
        assert body["diagnostics"][0]["path"] == "interzones[facade_n].side_a"

    def test_describe(self):
        body = client.post("/api/v1/buildings/describe", json=one_zone_document("nonlinear")).json()
        assert body["zones"] == 1
        assert body["zone_convection"] == {"room": "nonlinear"}

    def test_describe_invalid(self):
        document = one_zone_document()
        document["zones"][0]["volume"] = 0.0
        response = client.post("/api/v1/buildings/describe", json=document)
        assert response.status_code == 422
        assert response.json()["detail"][0]["path"] == "zones[room].volume"


class TestSimulations:
    def test_synthetic_weather(self):
        body = client.post("/api/v1/weather/synthetic", json={"days": ["sunny"]}).json()
        assert len(body["rows"]) == 24
        assert body["rows"][0]["timestamp"] == "2024-01-15T00:00:00"

    def test_unknown_synthetic_day(self):
        response = client.post("/api/v1/weather/synthetic", json={"days": ["stormy"]})
        assert response.status_code == 422

    def test_simulate(self):
        response = client.post("/api/v1/simulations", json={
            "building": one_zone_document(), "days": ["sunny"], "solver": QUICK, "label": "api",
        })
        assert response.status_code == 200
        body = response.json()
        assert body["label"] == "api"
        assert len(body["rows"]) == 24
        assert body["columns"][:2] == ["timestamp", "zone.room.tair"]
        assert body["timing"]["zones"][0]["name"] == "room"

    def test_simulate_posted_weather(self):
        weather = client.post("/api/v1/weather/synthetic", json={"days": ["cloudy"]}).json()["rows"]
        response = client.post("/api/v1/simulations", json={
            "building": one_zone_document(), "weather": weather[:6], "solver": QUICK,
        })
        assert len(response.json()["rows"]) == 6

    def test_simulate_rejects_bad_timestep(self):
        response = client.post("/api/v1/simulations", json={
            "building": one_zone_document(), "days": ["sunny"], "timestep": 700, "solver": QUICK,
        })
        assert response.status_code == 422

    def test_simulate_reports_convergence_failure(self):
        response = client.post("/api/v1/simulations", json={
            "building": one_zone_document("nonlinear"), "days": ["sunny"],
            "solver": {"warmup_days": 0, "max_convection_iterations": 1},
        })
        assert response.status_code == 409

    @pytest.mark.slow
    def test_compare(self):
        response = client.post("/api/v1/simulations/compare", json={
            "building": one_zone_document(), "days": ["sunny"], "solver": QUICK,
        })
        assert response.status_code == 200
        body = response.json()
        assert body["reference"] == "B"
        assert [case["label"] for case in body["cases"]] == ["A", "B", "C"]
        assert "solve ratio" in body["table"]
