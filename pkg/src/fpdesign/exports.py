"""Procedure transfer (TXT) and render snapshot (GeoJSON), plus re-import.

The TXT format is the safety-assessment hand-off and is fixed bit-exact:

    procedure,runway,destination
    1,<lat>,<lon>        (6 decimals, one line per waypoint)
    ...
    status,<Completed|Exhausted|...>

LF line endings, ASCII. import_txt reverses it so externally produced
procedures can be scored by the same metrics pipeline.

The GeoJSON snapshot is a FeatureCollection: the route polyline, one
primary polygon and one secondary two-strip MultiPolygon per leg, obstacle
points flagged notable or not, and the destination point. Coordinates are
[lon, lat] at 6 decimals; zone vertices are inset half a meter inside
their band so quantization never pushes a vertex across a boundary.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import CrossReferenceError, EmptyProcedure, ParseError
from .geodesy import GeoPoint, PolarStep, forward_point, inverse
from .navdata import Fix, NavDatabase, Runway
from .orchestrator import DesignSession, SessionStatus
from .protection import ZoneConfig, notable_obstacles
from .metrics import build_legs

ZONE_EDGE_INSET_M = 0.5


def export_txt(session: DesignSession) -> str:
    """Serialize the designed route for external safety assessment."""
    if not session.waypoints:
        raise EmptyProcedure("session has no waypoints to export")
    lines = [f"{session.procedure_name},{session.runway.name},{session.destination.name}"]
    for i, point in enumerate(session.waypoints, start=1):
        lines.append(f"{i},{point.lat:.6f},{point.lon:.6f}")
    lines.append(f"status,{session.status.value}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class ImportedProcedure:
    name: str
    icao: str
    runway: Runway
    destination: Fix
    waypoints: tuple[GeoPoint, ...]
    status: str

    @property
    def completed(self) -> bool:
        return self.status == SessionStatus.COMPLETED.value


def import_txt(text: str, db: NavDatabase) -> ImportedProcedure:
    """Parse an exported procedure and resolve it against the database.

    The airport is the unique one containing both the named runway and the
    destination fix (the header carries no airport code)."""
    lines = text.splitlines()
    if not lines:
        raise ParseError("empty file", line=1)
    header = lines[0].split(",")
    if len(header) != 3 or not all(header):
        raise ParseError(f"bad header {lines[0]!r}", line=1)
    name, runway_name, destination_name = (part.strip().upper() for part in header)

    waypoints: list[GeoPoint] = []
    status = SessionStatus.EXHAUSTED.value
    expecting_index = 1
    for line_no, raw in enumerate(lines[1:], start=2):
        if not raw.strip():
            continue
        parts = raw.split(",")
        if parts[0] == "status":
            if len(parts) != 2 or parts[1] not in {s.value for s in SessionStatus}:
                raise ParseError(f"bad status line {raw!r}", line=line_no)
            status = parts[1]
            continue
        if len(parts) != 3:
            raise ParseError(f"expected 'index,lat,lon' got {raw!r}", line=line_no)
        try:
            index, lat, lon = int(parts[0]), float(parts[1]), float(parts[2])
        except ValueError as exc:
            raise ParseError(f"non-numeric waypoint line {raw!r}", line=line_no) from exc
        if index != expecting_index:
            raise ParseError(f"waypoint index {index} out of order", line=line_no)
        try:
            waypoints.append(GeoPoint(lat, lon))
        except ValueError as exc:
            raise ParseError(str(exc), line=line_no) from exc
        expecting_index += 1
    if not waypoints:
        raise ParseError("no waypoint lines", line=2)

    matches = [
        airport for airport in db.airports.values()
        if runway_name in airport.runways and destination_name in airport.fixes
    ]
    if not matches:
        raise CrossReferenceError(
            f"no airport has both runway {runway_name!r} and fix {destination_name!r}")
    if len(matches) > 1:
        raise CrossReferenceError(
            f"runway {runway_name!r} + fix {destination_name!r} is ambiguous across "
            f"{[a.icao for a in matches]}")
    airport = matches[0]
    return ImportedProcedure(
        name=name, icao=airport.icao,
        runway=airport.runways[runway_name],
        destination=airport.fixes[destination_name],
        waypoints=tuple(waypoints), status=status,
    )


# --- GeoJSON snapshot --------------------------------------------------------


def _coord(point: GeoPoint) -> list[float]:
    return [round(point.lon, 6), round(point.lat, 6)]


def _offset(point: GeoPoint, track_bearing: float, lateral: float) -> GeoPoint:
    side = 90.0 if lateral >= 0.0 else -90.0
    return forward_point(point, PolarStep(track_bearing + side, abs(lateral)))


def _corridor_ring(start: GeoPoint, end: GeoPoint, inner: float, outer: float) -> list[list[float]]:
    """Planar-approximated rectangle between two lateral offsets of a leg
    (signed; right of track positive). Closed ring, counterclockwise-ish."""
    out_bearing = inverse(start, end).bearing
    in_bearing = (inverse(end, start).bearing + 180.0) % 360.0
    corners = [
        _offset(start, out_bearing, inner),
        _offset(start, out_bearing, outer),
        _offset(end, in_bearing, outer),
        _offset(end, in_bearing, inner),
    ]
    ring = [_coord(c) for c in corners]
    ring.append(ring[0])
    return ring


def _leg_zone_features(leg_index: int, start: GeoPoint, end: GeoPoint,
                       cfg: ZoneConfig) -> list[dict]:
    primary_edge = cfg.primary_half_width - ZONE_EDGE_INSET_M
    outer_edge = cfg.half_width - ZONE_EDGE_INSET_M
    inner_edge = cfg.primary_half_width + ZONE_EDGE_INSET_M
    features = [{
        "type": "Feature",
        "properties": {"band": "primary", "leg_index": leg_index},
        "geometry": {
            "type": "Polygon",
            "coordinates": [_corridor_ring(start, end, -primary_edge, primary_edge)],
        },
    }]
    if cfg.primary_fraction < 1.0:
        features.append({
            "type": "Feature",
            "properties": {"band": "secondary", "leg_index": leg_index},
            "geometry": {
                "type": "MultiPolygon",
                "coordinates": [
                    [_corridor_ring(start, end, inner_edge, outer_edge)],
                    [_corridor_ring(start, end, -outer_edge, -inner_edge)],
                ],
            },
        })
    return features


def build_snapshot(session: DesignSession, cfg: ZoneConfig | None = None) -> dict:
    """Snapshot of the session as a GeoJSON FeatureCollection dict."""
    cfg = cfg or session.zone_config
    features: list[dict] = []

    route = [session.runway.threshold, *session.waypoints]
    if session.waypoints:
        features.append({
            "type": "Feature",
            "properties": {"kind": "route", "procedure": session.procedure_name},
            "geometry": {
                "type": "LineString",
                "coordinates": [_coord(p) for p in route],
            },
        })
        for i, leg in enumerate(build_legs(session.runway.threshold, session.waypoints)):
            features.extend(_leg_zone_features(i, leg.start, leg.end, cfg))

    notable_names = {
        obstacle.name
        for obstacle, _ in notable_obstacles(
            session.current_position, session.runway.der_elevation,
            session.obstacles, cfg)
    }
    for obstacle in session.obstacles:
        features.append({
            "type": "Feature",
            "properties": {
                "kind": "obstacle",
                "name": obstacle.name,
                "elev_m": obstacle.elevation,
                "notable": obstacle.name in notable_names,
            },
            "geometry": {"type": "Point", "coordinates": _coord(obstacle.position)},
        })

    features.append({
        "type": "Feature",
        "properties": {"kind": "destination", "name": session.destination.name},
        "geometry": {"type": "Point", "coordinates": _coord(session.destination.position)},
    })

    return {
        "type": "FeatureCollection",
        "metadata": {
            "procedure": session.procedure_name,
            "round": session.round,
            "status": session.status.value,
        },
        "features": features,
    }


def render_geojson(session: DesignSession, cfg: ZoneConfig | None = None) -> str:
    return json.dumps(build_snapshot(session, cfg), ensure_ascii=False)
