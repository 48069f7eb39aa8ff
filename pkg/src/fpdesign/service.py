"""HTTP session service driving the supervision UI and automation.

Sessions live in memory, addressed by opaque ids. All mutation of one
session is serialized by a per-session lock taken without blocking: a step
or feedback call that races an in-flight round gets 409 instead of
waiting, so agent turns never interleave. The navigation database is
shared read-only.
"""

from __future__ import annotations

import os
import threading
import uuid
from dataclasses import dataclass, field
from typing import Callable

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from . import exports, metrics, orchestrator
from .backends import Backend, RemoteBackend, ReplayBackend, ScriptedBackend
from .errors import (
    BackendError,
    CrossReferenceError,
    EmptyProcedure,
    FpDesignError,
    IndexOutOfRange,
    InvalidState,
    InvalidStep,
    NotFound,
    ParseError,
)
from .navdata import NavDatabase
from .orchestrator import DesignSession, FixCommand, SessionConfig, SessionStatus
from .protection import ZoneConfig

BackendFactory = Callable[[dict], Backend]


def default_backend_factories() -> dict[str, BackendFactory]:
    return {
        "scripted": lambda body: ScriptedBackend(),
        "replay": lambda body: ReplayBackend(list(body.get("script") or [])),
        "remote": lambda body: RemoteBackend.from_env(os.environ),
    }


@dataclass
class SessionEntry:
    session: DesignSession
    backend: Backend
    lock: threading.Lock = field(default_factory=threading.Lock)


class CreateSessionBody(BaseModel):
    icao: str
    runway: str
    destination: str
    backend: str = "scripted"
    interactive: bool = False
    max_rounds: int = 8
    script: list[str] | None = None


class FeedbackBody(BaseModel):
    action: str
    fix_waypoint: int | None = None
    bearing: float | None = None
    distance: float | None = None
    last_waypoint_lat: float | None = None
    last_waypoint_lon: float | None = None


def _session_state(entry: SessionEntry, session_id: str) -> dict:
    session = entry.session
    return {
        "id": session_id,
        "icao": session.icao,
        "runway": session.runway.name,
        "destination": session.destination.name,
        "procedure": session.procedure_name,
        "waypoints": [[p.lat, p.lon] for p in session.waypoints],
        "round": session.round,
        "max_rounds": session.config.max_rounds,
        "status": session.status.value,
        "interactive": session.config.interactive,
        "hallucinations": dict(session.hallucinations),
        "transcript": [
            {"role": m.role, "content": m.content, "round": m.round, "parsed": m.parsed}
            for m in session.transcript
        ],
        "snapshot": exports.build_snapshot(session),
    }


def create_app(
    db: NavDatabase,
    zone_config: ZoneConfig | None = None,
    backend_factories: dict[str, BackendFactory] | None = None,
) -> FastAPI:
    app = FastAPI(title="fpdesign session service")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"])
    zone_config = zone_config or ZoneConfig()
    factories = {**default_backend_factories(), **(backend_factories or {})}
    sessions: dict[str, SessionEntry] = {}
    app.state.sessions = sessions

    def _entry(session_id: str) -> SessionEntry:
        entry = sessions.get(session_id)
        if entry is None:
            raise HTTPException(404, f"unknown session {session_id!r}")
        return entry

    @app.post("/sessions", status_code=201)
    def create_session_endpoint(body: CreateSessionBody):
        factory = factories.get(body.backend)
        if factory is None:
            raise HTTPException(422, f"unknown backend kind {body.backend!r}")
        try:
            config = SessionConfig(max_rounds=body.max_rounds, interactive=body.interactive)
            backend = factory(body.model_dump())
            session = orchestrator.create_session(
                db, body.icao, body.runway, body.destination,
                config=config, zone_config=zone_config)
        except NotFound as exc:
            raise HTTPException(404, str(exc)) from exc
        except (ValueError, FpDesignError) as exc:
            raise HTTPException(422, str(exc)) from exc
        session_id = uuid.uuid4().hex
        sessions[session_id] = SessionEntry(session, backend)
        return {"id": session_id}

    @app.get("/sessions/{session_id}")
    def get_session_endpoint(session_id: str):
        return _session_state(_entry(session_id), session_id)

    @app.post("/sessions/{session_id}/step")
    def step_endpoint(session_id: str):
        entry = _entry(session_id)
        if not entry.lock.acquire(blocking=False):
            raise HTTPException(409, "round in progress")
        try:
            session = entry.session
            if session.status is not SessionStatus.PLANNING:
                raise HTTPException(409, f"cannot step in status {session.status.value}")
            mark = len(session.transcript)
            waypoints_before = len(session.waypoints)
            try:
                orchestrator.step(session, entry.backend)
            except BackendError as exc:
                raise HTTPException(502, f"backend failure: {exc}") from exc
            except ParseError as exc:
                # session is already Failed; report the terminal state
                return {
                    **_session_state(entry, session_id),
                    "error": f"unparseable backend reply: {exc}",
                    "transcript_delta": [
                        {"role": m.role, "content": m.content, "round": m.round,
                         "parsed": m.parsed}
                        for m in session.transcript[mark:]
                    ],
                    "new_waypoint": None,
                }
            new_waypoint = (
                [session.waypoints[-1].lat, session.waypoints[-1].lon]
                if len(session.waypoints) > waypoints_before else None)
            return {
                **_session_state(entry, session_id),
                "new_waypoint": new_waypoint,
                "transcript_delta": [
                    {"role": m.role, "content": m.content, "round": m.round, "parsed": m.parsed}
                    for m in session.transcript[mark:]
                ],
            }
        finally:
            entry.lock.release()

    @app.post("/sessions/{session_id}/feedback")
    def feedback_endpoint(session_id: str, body: FeedbackBody):
        entry = _entry(session_id)
        if not entry.lock.acquire(blocking=False):
            raise HTTPException(409, "round in progress")
        try:
            try:
                command = FixCommand(
                    action=body.action,
                    fix_waypoint=body.fix_waypoint,
                    bearing=body.bearing,
                    distance=body.distance,
                    last_waypoint_lat=body.last_waypoint_lat,
                    last_waypoint_lon=body.last_waypoint_lon,
                )
            except ValueError as exc:
                raise HTTPException(422, str(exc)) from exc
            try:
                orchestrator.apply_fix(entry.session, command)
            except InvalidState as exc:
                raise HTTPException(409, str(exc)) from exc
            except (IndexOutOfRange, InvalidStep) as exc:
                raise HTTPException(422, str(exc)) from exc
            return _session_state(entry, session_id)
        finally:
            entry.lock.release()

    @app.post("/sessions/{session_id}/finalize")
    def finalize_endpoint(session_id: str):
        entry = _entry(session_id)
        if not entry.lock.acquire(blocking=False):
            raise HTTPException(409, "round in progress")
        try:
            try:
                txt = exports.export_txt(entry.session)
            except EmptyProcedure as exc:
                raise HTTPException(409, str(exc)) from exc
            report = metrics.evaluate_run([entry.session])
            return {
                "id": session_id,
                "status": entry.session.status.value,
                "metrics": report.to_dict(),
                "txt": txt,
            }
        finally:
            entry.lock.release()

    @app.get("/navdata/{icao}")
    def navdata_endpoint(icao: str):
        try:
            airport = db.airport(icao)
        except NotFound as exc:
            raise HTTPException(404, str(exc)) from exc
        return {
            "icao": airport.icao,
            "runways": [
                {"name": r.name, "lat": r.threshold.lat, "lon": r.threshold.lon,
                 "heading_deg": r.heading, "der_elev_m": r.der_elevation}
                for r in airport.runways.values()
            ],
            "fixes": [
                {"name": f.name, "lat": f.position.lat, "lon": f.position.lon}
                for f in airport.fixes.values()
            ],
            "obstacle_count": len(airport.obstacles),
            "procedures": list(airport.procedures),
        }

    return app
