"""Load, validate, and query the JSON navigation dataset.

One file describes any number of airports, each with runways, named fixes,
obstacles, and reference departure procedures. Loading is all-or-nothing:
either every record validates and every cross-reference resolves, or a
typed error pinpoints the offending JSON path. The loaded database is
immutable and safe to share across sessions.

Canonical schema (decimal degrees, meters, UTF-8)::

    {"airports": [{
        "icao": "ZUUU",
        "runways":    [{"name": "02L", "lat": .., "lon": .., "heading_deg": .., "der_elev_m": ..}],
        "fixes":      [{"name": "GURET", "lat": .., "lon": ..}],
        "obstacles":  [{"name": "UJ", "lat": .., "lon": .., "elev_m": ..}],
        "procedures": [{"name": "GURET-9W", "runway": "02L", "destination": "GURET",
                        "waypoints": [[lat, lon], ...]}]
    }]}
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import CrossReferenceError, NotFound, ParseError, SchemaError
from .geodesy import GeoPoint, distance_between, normalize_bearing

TERMINAL_COINCIDENCE_M = 100.0

_RUNWAY_NAME = re.compile(r"^\d{1,2}[LCR]?$")


def _canon(name: str) -> str:
    return name.strip().upper()


@dataclass(frozen=True)
class Runway:
    name: str
    threshold: GeoPoint
    heading: float
    der_elevation: float

    def __post_init__(self):
        object.__setattr__(self, "heading", normalize_bearing(self.heading))
        if not _RUNWAY_NAME.match(self.name):
            raise ValueError(f"runway name {self.name!r} not digits+[LCR]")


@dataclass(frozen=True)
class Fix:
    name: str
    position: GeoPoint

    def __post_init__(self):
        if not self.name:
            raise ValueError("fix name must be non-empty")


@dataclass(frozen=True)
class Obstacle:
    name: str
    position: GeoPoint
    elevation: float

    def __post_init__(self):
        if self.elevation <= 0.0:
            raise ValueError(f"obstacle {self.name!r} elevation must be > 0")


@dataclass(frozen=True)
class ReferenceProcedure:
    name: str
    runway: str
    destination: str
    waypoints: tuple[GeoPoint, ...]

    def __post_init__(self):
        if len(self.waypoints) < 1:
            raise ValueError(f"procedure {self.name!r} needs at least one waypoint")


@dataclass(frozen=True)
class Airport:
    icao: str
    runways: dict[str, Runway] = field(default_factory=dict)
    fixes: dict[str, Fix] = field(default_factory=dict)
    obstacles: dict[str, Obstacle] = field(default_factory=dict)
    procedures: dict[str, ReferenceProcedure] = field(default_factory=dict)


@dataclass(frozen=True)
class NavDatabase:
    airports: dict[str, Airport] = field(default_factory=dict)

    def airport(self, icao: str) -> Airport:
        key = _canon(icao)
        if key not in self.airports:
            raise NotFound("airport", icao)
        return self.airports[key]


def _require(obj: dict, key: str, types, path: str):
    if key not in obj:
        raise SchemaError(f"missing required field {key!r}", path)
    value = obj[key]
    if not isinstance(value, types) or isinstance(value, bool):
        raise SchemaError(f"field {key!r} has wrong type {type(value).__name__}", f"{path}.{key}")
    return value


def _geo(obj: dict, path: str, elevation: float = 0.0) -> GeoPoint:
    lat = _require(obj, "lat", (int, float), path)
    lon = _require(obj, "lon", (int, float), path)
    try:
        return GeoPoint(float(lat), float(lon), elevation)
    except ValueError as exc:
        raise SchemaError(str(exc), path) from exc


def _insert_unique(table: dict, key: str, value, category: str, path: str):
    if key in table:
        raise SchemaError(f"duplicate {category} name {key!r}", path)
    table[key] = value


def _load_airport(raw: dict, path: str) -> Airport:
    icao = _canon(_require(raw, "icao", str, path))

    runways: dict[str, Runway] = {}
    for i, r in enumerate(_require(raw, "runways", list, path)):
        p = f"{path}.runways[{i}]"
        if not isinstance(r, dict):
            raise SchemaError("runway entry must be an object", p)
        name = _canon(_require(r, "name", str, p))
        heading = float(_require(r, "heading_deg", (int, float), p))
        der_elev = float(_require(r, "der_elev_m", (int, float), p))
        try:
            runway = Runway(name, _geo(r, p, elevation=der_elev), heading, der_elev)
        except ValueError as exc:
            raise SchemaError(str(exc), p) from exc
        _insert_unique(runways, name, runway, "runway", p)

    fixes: dict[str, Fix] = {}
    for i, f in enumerate(_require(raw, "fixes", list, path)):
        p = f"{path}.fixes[{i}]"
        if not isinstance(f, dict):
            raise SchemaError("fix entry must be an object", p)
        name = _canon(_require(f, "name", str, p))
        try:
            fix = Fix(name, _geo(f, p))
        except ValueError as exc:
            raise SchemaError(str(exc), p) from exc
        _insert_unique(fixes, name, fix, "fix", p)

    obstacles: dict[str, Obstacle] = {}
    for i, o in enumerate(_require(raw, "obstacles", list, path)):
        p = f"{path}.obstacles[{i}]"
        if not isinstance(o, dict):
            raise SchemaError("obstacle entry must be an object", p)
        name = _canon(_require(o, "name", str, p))
        elev = float(_require(o, "elev_m", (int, float), p))
        try:
            obstacle = Obstacle(name, _geo(o, p, elevation=elev), elev)
        except ValueError as exc:
            raise SchemaError(str(exc), p) from exc
        _insert_unique(obstacles, name, obstacle, "obstacle", p)

    procedures: dict[str, ReferenceProcedure] = {}
    for i, pr in enumerate(_require(raw, "procedures", list, path)):
        p = f"{path}.procedures[{i}]"
        if not isinstance(pr, dict):
            raise SchemaError("procedure entry must be an object", p)
        name = _canon(_require(pr, "name", str, p))
        runway_name = _canon(_require(pr, "runway", str, p))
        destination = _canon(_require(pr, "destination", str, p))
        raw_wpts = _require(pr, "waypoints", list, p)
        waypoints = []
        for j, pair in enumerate(raw_wpts):
            wp = f"{p}.waypoints[{j}]"
            if not (isinstance(pair, list) and len(pair) == 2
                    and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in pair)):
                raise SchemaError("waypoint must be a [lat, lon] pair", wp)
            try:
                waypoints.append(GeoPoint(float(pair[0]), float(pair[1])))
            except ValueError as exc:
                raise SchemaError(str(exc), wp) from exc
        try:
            proc = ReferenceProcedure(name, runway_name, destination, tuple(waypoints))
        except ValueError as exc:
            raise SchemaError(str(exc), p) from exc

        if runway_name not in runways:
            raise CrossReferenceError(
                f"procedure {name!r} references unknown runway {runway_name!r} ({p})")
        if destination not in fixes:
            raise CrossReferenceError(
                f"procedure {name!r} references unknown fix {destination!r} ({p})")
        gap = distance_between(proc.waypoints[-1], fixes[destination].position)
        if gap > TERMINAL_COINCIDENCE_M:
            raise CrossReferenceError(
                f"procedure {name!r} ends {gap:.1f} m from fix {destination!r} "
                f"(limit {TERMINAL_COINCIDENCE_M:.0f} m)")
        _insert_unique(procedures, name, proc, "procedure", p)

    return Airport(icao, runways, fixes, obstacles, procedures)


def load_database(path: str | Path) -> NavDatabase:
    """Parse and fully validate a navigation dataset file."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    return load_database_obj(raw)


def load_database_obj(raw) -> NavDatabase:
    if not isinstance(raw, dict):
        raise SchemaError("top level must be an object", "$")
    airports: dict[str, Airport] = {}
    for i, entry in enumerate(_require(raw, "airports", list, "$")):
        p = f"$.airports[{i}]"
        if not isinstance(entry, dict):
            raise SchemaError("airport entry must be an object", p)
        airport = _load_airport(entry, p)
        _insert_unique(airports, airport.icao, airport, "airport", p)
    return NavDatabase(airports)


def lookup_runway(db: NavDatabase, icao: str, runway: str) -> Runway:
    airport = db.airport(icao)
    key = _canon(runway)
    if key not in airport.runways:
        raise NotFound("runway", f"{icao}/{runway}")
    return airport.runways[key]


def lookup_fix(db: NavDatabase, icao: str, name: str) -> Fix:
    airport = db.airport(icao)
    key = _canon(name)
    if key not in airport.fixes:
        raise NotFound("fix", f"{icao}/{name}")
    return airport.fixes[key]
