import json
import threading
import time
from pathlib import Path

import httpx
import pytest
import uvicorn
from fastapi.testclient import TestClient

from fpdesign.backends import Backend, ScriptedBackend
from fpdesign.navdata import load_database
from fpdesign.service import create_app

DATASET = Path(__file__).parent.parent / "src" / "fpdesign" / "data" / "airports.json"


@pytest.fixture(scope="module")
def db():
    return load_database(DATASET)


@pytest.fixture()
def client(db):
    with TestClient(create_app(db)) as test_client:
        yield test_client


def _create(client, **overrides):
    body = {"icao": "ZUUU", "runway": "02L", "destination": "GURET",
            "backend": "scripted", "interactive": False}
    body.update(overrides)
    response = client.post("/sessions", json=body)
    assert response.status_code == 201, response.text
    return response.json()["id"]


class TestSessionLifecycle:
    def test_create_returns_id(self, client):
        session_id = _create(client)
        assert session_id

    def test_create_unknown_fix_404(self, client):
        response = client.post("/sessions", json={
            "icao": "ZUUU", "runway": "02L", "destination": "XXXXX"})
        assert response.status_code == 404

    def test_create_unknown_backend_422(self, client):
        response = client.post("/sessions", json={
            "icao": "ZUUU", "runway": "02L", "destination": "GURET",
            "backend": "telepathy"})
        assert response.status_code == 422

    def test_get_unknown_session_404(self, client):
        assert client.get("/sessions/nope").status_code == 404

    def test_step_appends_waypoint_and_delta(self, client):
        session_id = _create(client)
        response = client.post(f"/sessions/{session_id}/step")
        assert response.status_code == 200
        payload = response.json()
        assert payload["new_waypoint"] is not None
        assert payload["round"] == 1
        roles = [m["role"] for m in payload["transcript_delta"]]
        assert roles == ["GroupManager", "PlanAgent", "WaypointAgent", "CalculateAgent"]
        assert payload["snapshot"]["type"] == "FeatureCollection"

    def test_full_run_to_completion(self, client):
        session_id = _create(client)
        status = "Planning"
        for _ in range(8):
            payload = client.post(f"/sessions/{session_id}/step").json()
            status = payload["status"]
            if status != "Planning":
                break
        assert status == "Completed"
        state = client.get(f"/sessions/{session_id}").json()
        assert state["status"] == "Completed"
        assert len(state["waypoints"]) == state["round"]

    def test_step_terminal_session_409(self, client):
        session_id = _create(client)
        while client.get(f"/sessions/{session_id}").json()["status"] == "Planning":
            client.post(f"/sessions/{session_id}/step")
        assert client.post(f"/sessions/{session_id}/step").status_code == 409

    def test_finalize_returns_metrics_and_txt(self, client):
        session_id = _create(client)
        while client.get(f"/sessions/{session_id}").json()["status"] == "Planning":
            client.post(f"/sessions/{session_id}/step")
        payload = client.post(f"/sessions/{session_id}/finalize").json()
        assert payload["metrics"]["mcr"] == 1.0
        assert payload["txt"].startswith("GURET-02L,02L,GURET\n")

    def test_finalize_empty_session_409(self, client):
        session_id = _create(client)
        assert client.post(f"/sessions/{session_id}/finalize").status_code == 409


class TestFeedback:
    def test_no_fix_resumes_planning(self, client):
        session_id = _create(client, interactive=True)
        payload = client.post(f"/sessions/{session_id}/step").json()
        assert payload["status"] == "AwaitingFeedback"
        response = client.post(f"/sessions/{session_id}/feedback",
                               json={"action": "no_fix"})
        assert response.status_code == 200
        assert response.json()["status"] == "Planning"

    def test_fix_moves_waypoint(self, client):
        session_id = _create(client, interactive=True)
        client.post(f"/sessions/{session_id}/step")
        response = client.post(f"/sessions/{session_id}/feedback", json={
            "action": "fix", "fix_waypoint": 1, "bearing": 21.9, "distance": 3551.4})
        assert response.status_code == 200
        state = response.json()
        assert len(state["waypoints"]) == 1
        assert state["waypoints"][0][0] == pytest.approx(30.62296597, abs=1e-6)

    def test_invalid_fix_422(self, client):
        session_id = _create(client, interactive=True)
        client.post(f"/sessions/{session_id}/step")
        response = client.post(f"/sessions/{session_id}/feedback", json={
            "action": "fix", "fix_waypoint": 9, "bearing": 10.0, "distance": 100.0})
        assert response.status_code == 422
        response = client.post(f"/sessions/{session_id}/feedback", json={"action": "fix"})
        assert response.status_code == 422

    def test_feedback_when_not_awaiting_409(self, client):
        session_id = _create(client)
        response = client.post(f"/sessions/{session_id}/feedback",
                               json={"action": "no_fix"})
        assert response.status_code == 409


class TestNavdataEndpoint:
    def test_summary(self, client):
        payload = client.get("/navdata/ZUUU").json()
        assert payload["icao"] == "ZUUU"
        assert any(r["name"] == "02L" for r in payload["runways"])
        assert any(f["name"] == "GURET" for f in payload["fixes"])
        assert "GURET-9W" in payload["procedures"]

    def test_unknown_airport_404(self, client):
        assert client.get("/navdata/KLAX").status_code == 404


class BlockingBackend(Backend):
    """Hands control to the test between request arrival and reply."""

    kind = "blocking"

    def __init__(self):
        self.entered = threading.Event()
        self.release = threading.Event()
        self.inner = ScriptedBackend()

    def complete(self, request):
        self.entered.set()
        assert self.release.wait(timeout=10.0), "test never released the backend"
        return self.inner.complete(request)


@pytest.fixture()
def live_server(db):
    """Real uvicorn server on an ephemeral port; TestClient cannot carry two
    truly concurrent in-flight requests."""
    blocking = BlockingBackend()
    app = create_app(db, backend_factories={"blocking": lambda body: blocking})
    config = uvicorn.Config(app, host="127.0.0.1", port=0, log_level="error")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    for _ in range(200):
        if server.started:
            break
        time.sleep(0.02)
    assert server.started
    port = server.servers[0].sockets[0].getsockname()[1]
    yield f"http://127.0.0.1:{port}", blocking
    server.should_exit = True
    thread.join(timeout=5.0)


class TestConcurrency:
    def test_double_step_yields_one_200_one_409(self, live_server):
        base, blocking = live_server
        with httpx.Client(base_url=base, timeout=30.0) as http:
            session_id = http.post("/sessions", json={
                "icao": "ZUUU", "runway": "02L", "destination": "GURET",
                "backend": "blocking"}).json()["id"]

            results = {}

            def first_step():
                results["first"] = http.post(f"/sessions/{session_id}/step").status_code

            worker = threading.Thread(target=first_step)
            worker.start()
            assert blocking.entered.wait(timeout=10.0)
            # first request is now mid-round inside the backend
            results["second"] = http.post(f"/sessions/{session_id}/step").status_code
            blocking.release.set()
            worker.join(timeout=30.0)

            assert sorted(results.values()) == [200, 409]
            state = http.get(f"/sessions/{session_id}").json()
            assert len(state["waypoints"]) == 1  # exactly one round ran
