"""Per-leg protection-zone geometry and obstacle clearance evaluation.

A leg's corridor extends half_width meters either side of the track. The
inner primary band (primary_fraction of the semi-width) demands the full
minimum obstacle clearance; the secondary band tapers that requirement
linearly to zero at the outer edge. The evaluation surface climbs from the
departure end of the runway at climb_gradient while the clearance
requirement grows at moc_gradient, both against cumulative along-track
distance. Boundary semantics are deterministic: on-boundary points are
inside their band, exact-clearance obstacles are safe.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import CoincidentPoints
from .geodesy import EARTH, EarthModel, GeoPoint, PolarStep, inverse
from .navdata import Obstacle


@dataclass(frozen=True)
class ZoneConfig:
    half_width: float = 4360.0
    primary_fraction: float = 0.5
    moc_gradient: float = 0.008
    moc_min: float = 0.0
    climb_gradient: float = 0.033
    notable_radius: float = 50_000.0

    def __post_init__(self):
        if self.half_width <= 0.0:
            raise ValueError("half_width must be positive")
        if not (0.0 < self.primary_fraction <= 1.0):
            raise ValueError("primary_fraction must be in (0, 1]")
        if self.moc_gradient <= 0.0 or self.climb_gradient < 0.0:
            raise ValueError("gradients must be positive (climb may be zero)")
        if self.moc_min < 0.0:
            raise ValueError("moc_min must be >= 0")
        if self.notable_radius <= 0.0:
            raise ValueError("notable_radius must be positive")

    @property
    def primary_half_width(self) -> float:
        return self.half_width * self.primary_fraction


class Band(enum.Enum):
    PRIMARY = "primary"
    SECONDARY = "secondary"
    OUTSIDE = "outside"


@dataclass(frozen=True)
class Leg:
    """One route segment; start_along_track is the cumulative distance of
    its start point from the departure end of the runway."""

    start: GeoPoint
    end: GeoPoint
    start_along_track: float = 0.0

    def __post_init__(self):
        if self.start_along_track < 0.0:
            raise ValueError("start_along_track must be >= 0")
        # raises CoincidentPoints for a degenerate leg
        inverse(self.start, self.end)

    def course(self, model: EarthModel = EARTH) -> PolarStep:
        return inverse(self.start, self.end, model)


@dataclass(frozen=True)
class ZonePointClass:
    band: Band
    cross_track: float
    along_track: float


@dataclass(frozen=True)
class Violation:
    obstacle: str
    leg_index: int
    deficit: float

    def __post_init__(self):
        if self.deficit <= 0.0:
            raise ValueError("a violation must have a positive deficit")


def band_for_cross_track(cross_track: float, cfg: ZoneConfig) -> Band:
    """Band membership is boundary-inclusive: points on a band edge belong
    to the inner band."""
    abs_cross = abs(cross_track)
    if abs_cross <= cfg.primary_half_width:
        return Band.PRIMARY
    if abs_cross <= cfg.half_width:
        return Band.SECONDARY
    return Band.OUTSIDE


def classify_point(leg: Leg, p: GeoPoint, cfg: ZoneConfig,
                   model: EarthModel = EARTH) -> ZonePointClass:
    """Signed cross-track (positive right of track), clamped along-track,
    and the band the point falls in."""
    course = leg.course(model)
    try:
        to_point = inverse(leg.start, p, model)
    except CoincidentPoints:
        return ZonePointClass(Band.PRIMARY, 0.0, 0.0)

    sigma13 = to_point.distance / model.radius
    rel = math.radians(to_point.bearing - course.bearing)
    sin_xt = math.sin(sigma13) * math.sin(rel)
    sin_xt = max(-1.0, min(1.0, sin_xt))
    xt = math.asin(sin_xt)
    cross = xt * model.radius

    cos_xt = math.cos(xt)
    if cos_xt < 1e-12:
        along = 0.0
    else:
        ratio = max(-1.0, min(1.0, math.cos(sigma13) / cos_xt))
        along = math.acos(ratio) * model.radius
        if math.cos(rel) < 0.0:
            along = -along
    along = max(0.0, min(course.distance, along))
    return ZonePointClass(band_for_cross_track(cross, cfg), cross, along)


def required_clearance(along_track_total: float, cls: ZonePointClass, cfg: ZoneConfig) -> float:
    """MOC at this point: full in the primary band, tapering linearly to
    zero across the secondary band, zero outside."""
    if along_track_total < 0.0:
        raise ValueError("along_track_total must be >= 0")
    moc = max(cfg.moc_min, cfg.moc_gradient * along_track_total)
    if cls.band is Band.PRIMARY:
        return moc
    if cls.band is Band.SECONDARY:
        span = cfg.half_width * (1.0 - cfg.primary_fraction)
        if span <= 0.0:
            return 0.0
        return moc * (cfg.half_width - abs(cls.cross_track)) / span
    return 0.0


def evaluation_altitude(s: float, der_elev: float, cfg: ZoneConfig) -> float:
    """Procedure altitude used for clearance checks, s meters from the DER."""
    if s < 0.0:
        raise ValueError("s must be >= 0")
    return der_elev + cfg.climb_gradient * s


def leg_violations(leg: Leg, der_elev: float, obstacles: list[Obstacle],
                   cfg: ZoneConfig, leg_index: int = 0,
                   model: EarthModel = EARTH) -> list[Violation]:
    """Obstacles inside the leg's zone whose clearance falls short of the
    required MOC. Empty list means the leg is safe."""
    found: list[Violation] = []
    for obstacle in obstacles:
        cls = classify_point(leg, obstacle.position, cfg, model)
        if cls.band is Band.OUTSIDE:
            continue
        s = leg.start_along_track + cls.along_track
        clearance = evaluation_altitude(s, der_elev, cfg) - obstacle.elevation
        required = required_clearance(s, cls, cfg)
        if clearance < required:
            found.append(Violation(obstacle.name, leg_index, required - clearance))
    return found


def notable_obstacles(reference: GeoPoint, der_elev: float, obstacles: list[Obstacle],
                      cfg: ZoneConfig, model: EarthModel = EARTH
                      ) -> list[tuple[Obstacle, PolarStep]]:
    """Obstacles within notable_radius of `reference` tall enough to violate
    the full-MOC surface if overflown directly, nearest first, each paired
    with its (bearing, distance) from the reference point."""
    result: list[tuple[Obstacle, PolarStep]] = []
    for obstacle in obstacles:
        try:
            step = inverse(reference, obstacle.position, model)
        except CoincidentPoints:
            step = PolarStep(0.0, 0.1)
        if step.distance > cfg.notable_radius:
            continue
        surface = evaluation_altitude(step.distance, der_elev, cfg)
        moc = max(cfg.moc_min, cfg.moc_gradient * step.distance)
        if obstacle.elevation > surface - moc:
            result.append((obstacle, step))
    result.sort(key=lambda pair: pair[1].distance)
    return result
