"""Route-quality metrics over a batch of designed procedures.

Three fractions summarize a run: the share of obstacle-safe legs (FPS),
the share of procedures whose first leg stays within the allowed offset of
the runway heading (SCC), and the share of designs that reached their
destination within the round budget (MCR). Incomplete designs still score
on the first two axes; only MCR penalizes not finishing.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import MetricUndefined
from .geodesy import GeoPoint, angular_difference, inverse
from .navdata import Fix, Obstacle, Runway
from .orchestrator import DesignSession, SessionConfig, SessionStatus
from .protection import Leg, Violation, ZoneConfig, leg_violations


@dataclass(frozen=True)
class ProcedureResult:
    name: str
    icao: str
    runway_name: str
    destination_name: str
    legs: tuple[Leg, ...]
    violations: tuple[tuple[Violation, ...], ...]
    completed: bool
    first_leg_ok: bool
    status: str

    @property
    def safe_leg_count(self) -> int:
        return sum(1 for v in self.violations if not v)

    @property
    def waypoint_count(self) -> int:
        return len(self.legs)


def build_legs(threshold: GeoPoint, waypoints: list[GeoPoint]) -> tuple[Leg, ...]:
    """One leg per waypoint, threshold first, with cumulative along-track."""
    legs = []
    cursor = threshold
    along = 0.0
    for waypoint in waypoints:
        leg = Leg(cursor, waypoint, along)
        legs.append(leg)
        along += leg.course().distance
        cursor = waypoint
    return tuple(legs)


def result_from_waypoints(
    name: str,
    icao: str,
    runway: Runway,
    destination: Fix,
    obstacles: list[Obstacle],
    waypoints: list[GeoPoint],
    completed: bool,
    status: str,
    zone_config: ZoneConfig | None = None,
    session_config: SessionConfig | None = None,
) -> ProcedureResult:
    zone_config = zone_config or ZoneConfig()
    session_config = session_config or SessionConfig()
    legs = build_legs(runway.threshold, waypoints)
    violations = tuple(
        tuple(leg_violations(leg, runway.der_elevation, obstacles, zone_config, leg_index=i))
        for i, leg in enumerate(legs)
    )
    if waypoints:
        first = inverse(runway.threshold, waypoints[0])
        first_ok = angular_difference(first.bearing, runway.heading) <= session_config.first_leg_max_offset
    else:
        first_ok = False
    return ProcedureResult(
        name=name, icao=icao, runway_name=runway.name,
        destination_name=destination.name, legs=legs, violations=violations,
        completed=completed, first_leg_ok=first_ok, status=status,
    )


def result_for_session(session: DesignSession) -> ProcedureResult:
    return result_from_waypoints(
        name=session.procedure_name,
        icao=session.icao,
        runway=session.runway,
        destination=session.destination,
        obstacles=session.obstacles,
        waypoints=session.waypoints,
        completed=session.status is SessionStatus.COMPLETED,
        status=session.status.value,
        zone_config=session.zone_config,
        session_config=session.config,
    )


def compute_fps(results: list[ProcedureResult]) -> float:
    """Safe legs over all legs."""
    total = sum(len(r.legs) for r in results)
    if total == 0:
        raise MetricUndefined("no legs to score")
    safe = sum(r.safe_leg_count for r in results)
    return safe / total


def compute_scc(results: list[ProcedureResult]) -> float:
    """Procedures whose first leg honors the heading-offset constraint."""
    if not results:
        raise MetricUndefined("no procedures to score")
    return sum(1 for r in results if r.first_leg_ok) / len(results)


def compute_mcr(results: list[ProcedureResult]) -> float:
    """Procedures that reached their destination within the round budget."""
    if not results:
        raise MetricUndefined("no procedures to score")
    return sum(1 for r in results if r.completed) / len(results)


@dataclass(frozen=True)
class MetricsReport:
    fps: float | None
    scc: float | None
    mcr: float | None
    n_legs: int
    n_procedures: int
    results: tuple[ProcedureResult, ...] = ()
    waypoint_histogram: dict[int, int] = field(default_factory=dict)

    @property
    def defined(self) -> bool:
        return None not in (self.fps, self.scc, self.mcr)

    def to_dict(self) -> dict:
        return {
            "fps": self.fps,
            "scc": self.scc,
            "mcr": self.mcr,
            "fps_percent": None if self.fps is None else format_percent(self.fps),
            "scc_percent": None if self.scc is None else format_percent(self.scc),
            "mcr_percent": None if self.mcr is None else format_percent(self.mcr),
            "n_legs": self.n_legs,
            "n_procedures": self.n_procedures,
            "waypoint_histogram": {str(k): v for k, v in sorted(self.waypoint_histogram.items())},
            "procedures": [
                {
                    "name": r.name,
                    "icao": r.icao,
                    "runway": r.runway_name,
                    "destination": r.destination_name,
                    "status": r.status,
                    "completed": r.completed,
                    "first_leg_ok": r.first_leg_ok,
                    "legs": len(r.legs),
                    "safe_legs": r.safe_leg_count,
                    "violations": [
                        {"obstacle": v.obstacle, "leg_index": v.leg_index,
                         "deficit_m": round(v.deficit, 3)}
                        for per_leg in r.violations for v in per_leg
                    ],
                }
                for r in self.results
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False)


def evaluate_results(results: list[ProcedureResult]) -> MetricsReport:
    histogram: dict[int, int] = {}
    for r in results:
        histogram[r.waypoint_count] = histogram.get(r.waypoint_count, 0) + 1

    def _try(fn):
        try:
            return fn(results)
        except MetricUndefined:
            return None

    return MetricsReport(
        fps=_try(compute_fps),
        scc=_try(compute_scc),
        mcr=_try(compute_mcr),
        n_legs=sum(len(r.legs) for r in results),
        n_procedures=len(results),
        results=tuple(results),
        waypoint_histogram=histogram,
    )


def evaluate_run(sessions: list[DesignSession]) -> MetricsReport:
    """Score a batch of sessions (typically one per dataset procedure)."""
    return evaluate_results([result_for_session(s) for s in sessions])


def format_percent(fraction: float) -> str:
    """Percent string with at most two decimals and no trailing zeros:
    0.75 -> "75", 0.875 -> "87.5", 54/55 -> "98.18"."""
    text = f"{fraction * 100.0:.2f}".rstrip("0").rstrip(".")
    return text if text else "0"


def format_table(report: MetricsReport, label: str = "run") -> str:
    """Human-readable summary table."""
    def cell(value):
        return "n/a" if value is None else format_percent(value)

    header = f"{'':12s}{'FPS(%)':>10s}{'SCC(%)':>10s}{'MCR(%)':>10s}"
    row = (f"{label[:12]:12s}{cell(report.fps):>10s}{cell(report.scc):>10s}"
           f"{cell(report.mcr):>10s}")
    footer = (f"procedures: {report.n_procedures}  legs: {report.n_legs}  "
              f"waypoints histogram: "
              + (", ".join(f"{k}:{v}" for k, v in sorted(report.waypoint_histogram.items()))
                 or "-"))
    return "\n".join([header, row, footer])
