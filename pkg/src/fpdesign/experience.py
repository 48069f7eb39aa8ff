"""Experience memory: bucketed decision traces of past procedures and the
two similarity retrievals that surface them to the planner.

A meta action is a coarse decision: one of eight 45-degree azimuth octants
paired with a banded distance range, or the terminal Arrival marker. An
experience entry replays a reference procedure as the sequence of meta
actions a designer would have taken, each tagged with the distance still to
go at decision time. Bucket intervals are half-open (lower edge inside), so
every step maps to exactly one meta action.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DegenerateLeg, NotFound
from .geodesy import (
    GeoPoint,
    PolarStep,
    angular_difference,
    distance_between,
    inverse,
    normalize_bearing,
)
from .navdata import NavDatabase, ReferenceProcedure

AZIMUTH_SPAN = 45.0
DISTANCE_EDGES_KM = (0.0, 10.0, 20.0, 30.0, 50.0, math.inf)

# Reciprocal-score clamps: the similarity formulas divide by a distance or
# an angle, so exact matches are floored to keep scores finite while
# preserving the argmax ordering.
MIN_TERMINAL_DELTA_M = 1.0
MIN_HEADING_DELTA_DEG = 0.1


@dataclass(frozen=True)
class MetaAction:
    """Either an (azimuth octant, distance band) pair or Arrival."""

    azimuth_bucket: tuple[float, float] | None
    distance_bucket_km: tuple[float, float] | None
    arrival: bool = False

    def __post_init__(self):
        has_buckets = self.azimuth_bucket is not None and self.distance_bucket_km is not None
        if self.arrival == has_buckets:
            raise ValueError("meta action is either bucketed or Arrival, never both")

    @classmethod
    def arrival_marker(cls) -> "MetaAction":
        return cls(None, None, True)

    @classmethod
    def for_step(cls, step: PolarStep) -> "MetaAction":
        return cls(azimuth_bucket_for(step.bearing), distance_bucket_for(step.distance))

    def label(self) -> str:
        if self.arrival:
            return "arrival destination!"
        return f"({azimuth_label(self.azimuth_bucket)},{distance_label(self.distance_bucket_km)})"


def azimuth_bucket_for(bearing: float) -> tuple[float, float]:
    i = int(normalize_bearing(bearing) // AZIMUTH_SPAN) % 8
    return (AZIMUTH_SPAN * i, AZIMUTH_SPAN * (i + 1))


def distance_bucket_for(distance_m: float) -> tuple[float, float]:
    km = distance_m / 1000.0
    for lo, hi in zip(DISTANCE_EDGES_KM, DISTANCE_EDGES_KM[1:]):
        if lo <= km < hi:
            return (lo, hi)
    raise ValueError(f"distance not bucketable: {distance_m}")


def azimuth_label(bucket: tuple[float, float]) -> str:
    return f"{bucket[0]:g}-{bucket[1]:g}°"


def distance_label(bucket: tuple[float, float]) -> str:
    lo, hi = bucket
    return "50+km" if math.isinf(hi) else f"{lo:g}-{hi:g}km"


@dataclass(frozen=True)
class TraceElement:
    index: int
    dist_to_destination: float
    action: MetaAction


@dataclass(frozen=True)
class ExperienceEntry:
    destination: str
    runway: str
    runway_heading: float
    terminal_point: GeoPoint
    trace: tuple[TraceElement, ...]

    def __post_init__(self):
        if not self.trace or not self.trace[-1].action.arrival:
            raise ValueError("trace must end with the Arrival marker")
        if any(el.dist_to_destination < 0.0 for el in self.trace):
            raise ValueError("distances to destination must be >= 0")
        if self.trace[-1].dist_to_destination > min(el.dist_to_destination for el in self.trace):
            raise ValueError("final trace element must carry the smallest distance")


@dataclass(frozen=True)
class SimilarityScore:
    value: float

    def __post_init__(self):
        if not (math.isfinite(self.value) and self.value > 0.0):
            raise ValueError("similarity score must be finite and positive")


def encode_experience(proc: ReferenceProcedure, db: NavDatabase,
                      icao: str | None = None) -> ExperienceEntry:
    """Turn a reference procedure into its decision trace. Step 1 originates
    at the runway threshold; each element records the distance from the
    decision point (the previous waypoint) to the destination fix."""
    airport = _airport_of(proc, db, icao)
    runway = airport.runways[proc.runway]
    destination = airport.fixes[proc.destination]

    elements: list[TraceElement] = []
    origin = runway.threshold
    for k, waypoint in enumerate(proc.waypoints, start=1):
        try:
            step = inverse(origin, waypoint)
        except Exception as exc:
            raise DegenerateLeg(f"procedure {proc.name!r}: waypoints {k - 1} and {k} coincide") from exc
        elements.append(TraceElement(
            k, distance_between(origin, destination.position), MetaAction.for_step(step)))
        origin = waypoint
    elements.append(TraceElement(
        len(proc.waypoints) + 1,
        distance_between(origin, destination.position),
        MetaAction.arrival_marker(),
    ))
    return ExperienceEntry(
        destination=proc.destination,
        runway=proc.runway,
        runway_heading=runway.heading,
        terminal_point=proc.waypoints[-1],
        trace=tuple(elements),
    )


def _airport_of(proc: ReferenceProcedure, db: NavDatabase, icao: str | None):
    if icao is not None:
        return db.airport(icao)
    for airport in db.airports.values():
        if airport.procedures.get(proc.name) == proc:
            return airport
    raise NotFound("procedure", proc.name)


def build_memory(db: NavDatabase, icao: str,
                 exclude: tuple[str, str] | None = None) -> list[ExperienceEntry]:
    """Encode every reference procedure of an airport, optionally holding out
    the (runway, destination) pair currently being designed."""
    airport = db.airport(icao)
    memory = []
    for proc in airport.procedures.values():
        if exclude is not None and (proc.runway, proc.destination) == exclude:
            continue
        memory.append(encode_experience(proc, db, icao))
    return memory


def similar_same_runway(memory: list[ExperienceEntry], design_runway: str,
                        design_terminal: GeoPoint
                        ) -> tuple[ExperienceEntry, SimilarityScore] | None:
    """Most similar past procedure departing the same runway: reciprocal of
    the distance between its terminal waypoint and the design's. First
    entry wins ties."""
    runway = design_runway.strip().upper()
    best: tuple[ExperienceEntry, float] | None = None
    for entry in memory:
        if entry.runway != runway:
            continue
        delta = max(distance_between(entry.terminal_point, design_terminal), MIN_TERMINAL_DELTA_M)
        score = 1.0 / delta
        if best is None or score > best[1]:
            best = (entry, score)
    if best is None:
        return None
    return best[0], SimilarityScore(best[1])


def similar_same_destination(memory: list[ExperienceEntry], design_destination: str,
                             design_heading: float
                             ) -> tuple[ExperienceEntry, SimilarityScore] | None:
    """Most similar past procedure reaching the same destination: reciprocal
    of the angular difference between runway headings."""
    destination = design_destination.strip().upper()
    best: tuple[ExperienceEntry, float] | None = None
    for entry in memory:
        if entry.destination != destination:
            continue
        delta = max(angular_difference(entry.runway_heading, design_heading), MIN_HEADING_DELTA_DEG)
        score = 1.0 / delta
        if best is None or score > best[1]:
            best = (entry, score)
    if best is None:
        return None
    return best[0], SimilarityScore(best[1])


def ordinal(n: int) -> str:
    if 10 <= n % 100 <= 20:
        suffix = "th"
    else:
        suffix = {1: "st", 2: "nd", 3: "rd"}.get(n % 10, "th")
    return f"{n}{suffix}"


def format_trace_for_prompt(entry: ExperienceEntry) -> str:
    """The exact textual trace form used in planner prompts. Replay tests
    depend on this being byte-stable; change nothing lightly."""
    parts = []
    for element in entry.trace:
        if element.action.arrival:
            parts.append(f"({ordinal(element.index)} waypoint:arrival destination!)")
        else:
            parts.append(
                f"({ordinal(element.index)} waypoint,"
                f"dis to destination:{element.dist_to_destination:.1f},"
                f"meta action:{element.action.label()})"
            )
    return ",".join(parts)
