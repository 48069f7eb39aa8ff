"""Great-circle geodesic math: forward/inverse problems and bearing arithmetic.

All positions are decimal degrees, all distances are arc lengths in meters
along a sphere, all bearings are true bearings in degrees clockwise from
north. The earth model is a parameter so an ellipsoid can be swapped in
later; the default sphere reproduces the reference calculator outputs this
engine is tested against to well under 1e-4 degrees.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import CoincidentPoints, PolarRegion

MAX_FORWARD_LATITUDE = 89.0
COINCIDENCE_METERS = 0.1


def normalize_bearing(deg: float) -> float:
    """Map any finite angle to [0, 360)."""
    b = math.fmod(deg, 360.0)
    return b + 360.0 if b < 0.0 else b


def normalize_longitude(deg: float) -> float:
    """Map any finite longitude to (-180, 180]."""
    v = math.fmod(deg + 180.0, 360.0)
    if v <= 0.0:
        v += 360.0
    return v - 180.0


@dataclass(frozen=True)
class GeoPoint:
    """Position in decimal degrees, elevation in meters above MSL."""

    lat: float
    lon: float
    elevation: float = 0.0

    def __post_init__(self):
        if not (-90.0 <= self.lat <= 90.0):
            raise ValueError(f"latitude out of range: {self.lat}")
        if not (-180.0 < self.lon <= 180.0):
            raise ValueError(f"longitude out of range: {self.lon}")
        if not math.isfinite(self.elevation):
            raise ValueError("elevation must be finite")


@dataclass(frozen=True)
class PolarStep:
    """A (bearing, distance) decision: degrees clockwise from north, meters."""

    bearing: float
    distance: float

    def __post_init__(self):
        if not math.isfinite(self.bearing):
            raise ValueError("bearing must be finite")
        object.__setattr__(self, "bearing", normalize_bearing(self.bearing))
        if not (math.isfinite(self.distance) and self.distance > 0.0):
            raise ValueError(f"distance must be finite and positive: {self.distance}")


@dataclass(frozen=True)
class EarthModel:
    radius: float = 6_371_000.0

    def __post_init__(self):
        if not (math.isfinite(self.radius) and self.radius > 0.0):
            raise ValueError("earth radius must be positive")


EARTH = EarthModel()


def forward_point(origin: GeoPoint, step: PolarStep, model: EarthModel = EARTH) -> GeoPoint:
    """Destination on the great circle leaving `origin` at `step.bearing`,
    after `step.distance` meters of arc.

    Raises PolarRegion within 1 degree of a pole, where the output
    longitude is ill-conditioned and callers must reject the move.
    """
    if abs(origin.lat) >= MAX_FORWARD_LATITUDE:
        raise PolarRegion(f"origin latitude {origin.lat} too close to a pole")
    delta = step.distance / model.radius
    theta = math.radians(step.bearing)
    lat1 = math.radians(origin.lat)
    lon1 = math.radians(origin.lon)

    sin_lat2 = math.sin(lat1) * math.cos(delta) + math.cos(lat1) * math.sin(delta) * math.cos(theta)
    sin_lat2 = max(-1.0, min(1.0, sin_lat2))
    lat2 = math.asin(sin_lat2)
    lon2 = lon1 + math.atan2(
        math.sin(theta) * math.sin(delta) * math.cos(lat1),
        math.cos(delta) - math.sin(lat1) * sin_lat2,
    )
    return GeoPoint(math.degrees(lat2), normalize_longitude(math.degrees(lon2)))


def inverse(origin: GeoPoint, target: GeoPoint, model: EarthModel = EARTH) -> PolarStep:
    """Initial great-circle bearing and arc distance from `origin` to `target`.

    Raises CoincidentPoints when the two positions are closer than 0.1 m,
    where the bearing is undefined.
    """
    lat1 = math.radians(origin.lat)
    lat2 = math.radians(target.lat)
    dlat = lat2 - lat1
    dlon = math.radians(target.lon - origin.lon)

    a = math.sin(dlat / 2.0) ** 2 + math.cos(lat1) * math.cos(lat2) * math.sin(dlon / 2.0) ** 2
    a = max(0.0, min(1.0, a))
    sigma = 2.0 * math.atan2(math.sqrt(a), math.sqrt(1.0 - a))
    distance = sigma * model.radius
    if distance < COINCIDENCE_METERS:
        raise CoincidentPoints(f"points within {COINCIDENCE_METERS} m")

    bearing = math.degrees(
        math.atan2(
            math.sin(dlon) * math.cos(lat2),
            math.cos(lat1) * math.sin(lat2) - math.sin(lat1) * math.cos(lat2) * math.cos(dlon),
        )
    )
    return PolarStep(normalize_bearing(bearing), distance)


def distance_between(a: GeoPoint, b: GeoPoint, model: EarthModel = EARTH) -> float:
    """Arc distance in meters; 0.0 for coincident points (no bearing needed)."""
    try:
        return inverse(a, b, model).distance
    except CoincidentPoints:
        return 0.0


def angular_difference(a: float, b: float) -> float:
    """Minimal absolute angle in degrees between two headings, in [0, 180]."""
    d = abs(normalize_bearing(a) - normalize_bearing(b))
    return min(d, 360.0 - d)
