"""The multi-agent design state machine.

One step() call runs a full round: the group manager hands the turn to the
planner, the planner answers with a coarse meta action (or Arrival), the
waypoint agent refines it to a precise (bearing, distance), and the
calculate agent turns that into coordinates, appending one waypoint. A
session terminates by arriving (Completed), running out of rounds
(Exhausted), or failing to produce parseable decisions twice in a row
(Failed). Interactive sessions pause after every round so a human can
apply a fix command before the next one.

Sessions are deterministic functions of (database, config, backend reply
sequence); replaying a recorded transcript reproduces the waypoint list
byte for byte.
"""

from __future__ import annotations

import enum
import json
import logging
import re
from dataclasses import dataclass, field
from importlib import resources

from .backends import Backend, ChatMessage, ChatRequest, PlanView, WaypointView
from .errors import (
    Cancelled,
    IndexOutOfRange,
    InvalidState,
    InvalidStep,
    ParseError,
)
from .experience import (
    ExperienceEntry,
    MetaAction,
    build_memory,
    format_trace_for_prompt,
    ordinal,
)
from .geodesy import GeoPoint, PolarStep, angular_difference, forward_point, inverse
from .navdata import Fix, NavDatabase, Obstacle, Runway, lookup_fix, lookup_runway
from .protection import ZoneConfig, notable_obstacles

log = logging.getLogger(__name__)


class AgentRole(str, enum.Enum):
    GROUP_MANAGER = "GroupManager"
    TASK_AGENT = "TaskAgent"
    PLAN_AGENT = "PlanAgent"
    WAYPOINT_AGENT = "WaypointAgent"
    CALCULATE_AGENT = "CalculateAgent"
    RENDER_AGENT = "RenderAgent"
    FIX_WAYPOINT_AGENT = "FixWaypointAgent"


class SessionStatus(str, enum.Enum):
    PLANNING = "Planning"
    AWAITING_FEEDBACK = "AwaitingFeedback"
    COMPLETED = "Completed"
    EXHAUSTED = "Exhausted"
    FAILED = "Failed"


@dataclass
class Message:
    role: str
    content: str
    round: int
    parsed: dict | None = None

    def to_json(self) -> str:
        return json.dumps(
            {"role": self.role, "content": self.content, "round": self.round, "parsed": self.parsed},
            ensure_ascii=False,
        )

    @classmethod
    def from_json(cls, line: str) -> "Message":
        record = json.loads(line)
        return cls(record["role"], record["content"], record["round"], record.get("parsed"))


@dataclass(frozen=True)
class SessionConfig:
    max_rounds: int = 8
    first_leg_max_offset: float = 15.0
    arrival_radius: float = 2000.0
    interactive: bool = False

    def __post_init__(self):
        if self.max_rounds < 1:
            raise ValueError("max_rounds must be >= 1")
        if not (0.0 < self.first_leg_max_offset < 90.0):
            raise ValueError("first_leg_max_offset must be in (0, 90)")
        if self.arrival_radius <= 0.0:
            raise ValueError("arrival_radius must be positive")


@dataclass(frozen=True)
class FixCommand:
    """Structured human feedback: either leave the round alone or relocate
    one waypoint by a (bearing, distance) from its predecessor."""

    action: str  # "fix" | "no_fix"
    fix_waypoint: int | None = None
    bearing: float | None = None
    distance: float | None = None
    last_waypoint_lat: float | None = None
    last_waypoint_lon: float | None = None

    def __post_init__(self):
        if self.action not in ("fix", "no_fix"):
            raise ValueError(f"action must be 'fix' or 'no_fix', got {self.action!r}")
        if self.action == "fix":
            if self.fix_waypoint is None or self.bearing is None or self.distance is None:
                raise ValueError("fix requires fix_waypoint, bearing and distance")
            if (self.last_waypoint_lat is None) != (self.last_waypoint_lon is None):
                raise ValueError("anchor latitude and longitude come together")

    _TEXT = re.compile(
        r"(?P<idx>\d+)\s*(?:st|nd|rd|th)?\s*waypoint\s*fix.*?"
        r"fix_bearing\s*:\s*(?P<bearing>-?\d+(?:\.\d+)?).*?"
        r"fix_distance\s*:\s*(?P<distance>-?\d+(?:\.\d+)?)",
        re.IGNORECASE | re.DOTALL,
    )
    _ANCHOR = re.compile(
        r"last_waypoint_lat\s*:\s*(?P<lat>-?\d+(?:\.\d+)?).*?"
        r"last_waypoint_lon\s*:\s*(?P<lon>-?\d+(?:\.\d+)?)",
        re.IGNORECASE | re.DOTALL,
    )

    @classmethod
    def parse(cls, text: str) -> "FixCommand":
        """Accepts the terse operator grammar: "no fix" or
        "1st waypoint fix, fix_bearing:21.9, fix_distance:3551.4
        [, last_waypoint_lat:.., last_waypoint_lon:..]"."""
        stripped = text.strip().lower()
        if stripped in ("no fix", "no_fix", "nofix"):
            return cls("no_fix")
        match = cls._TEXT.search(text)
        if not match:
            raise ParseError(f"unrecognized fix command: {text!r}")
        anchor = cls._ANCHOR.search(text)
        return cls(
            "fix",
            fix_waypoint=int(match["idx"]),
            bearing=float(match["bearing"]),
            distance=float(match["distance"]),
            last_waypoint_lat=float(anchor["lat"]) if anchor else None,
            last_waypoint_lon=float(anchor["lon"]) if anchor else None,
        )


@dataclass
class DesignSession:
    icao: str
    runway: Runway
    destination: Fix
    config: SessionConfig
    zone_config: ZoneConfig
    obstacles: list[Obstacle]
    memory: list[ExperienceEntry]
    procedure_name: str
    waypoints: list[GeoPoint] = field(default_factory=list)
    transcript: list[Message] = field(default_factory=list)
    round: int = 0
    status: SessionStatus = SessionStatus.PLANNING
    hallucinations: dict[str, int] = field(default_factory=dict)

    @property
    def current_position(self) -> GeoPoint:
        return self.waypoints[-1] if self.waypoints else self.runway.threshold

    def transcript_jsonl(self) -> str:
        return "\n".join(message.to_json() for message in self.transcript) + "\n"


def create_session(
    db: NavDatabase,
    icao: str,
    runway: str,
    destination: str,
    config: SessionConfig | None = None,
    backend: Backend | None = None,
    zone_config: ZoneConfig | None = None,
    hold_out_design_pair: bool = True,
) -> DesignSession:
    """Resolve identifiers, build the airport's experience memory (holding
    out the procedure being designed), and record the task agent's
    extraction of the request. `backend` is accepted for call-site symmetry
    with step(); creation itself never consults it."""
    config = config or SessionConfig()
    zone_config = zone_config or ZoneConfig()
    resolved_runway = lookup_runway(db, icao, runway)
    resolved_fix = lookup_fix(db, icao, destination)
    airport = db.airport(icao)
    exclude = (resolved_runway.name, resolved_fix.name) if hold_out_design_pair else None
    session = DesignSession(
        icao=airport.icao,
        runway=resolved_runway,
        destination=resolved_fix,
        config=config,
        zone_config=zone_config,
        obstacles=list(airport.obstacles.values()),
        memory=build_memory(db, airport.icao, exclude=exclude),
        procedure_name=f"{resolved_fix.name}-{resolved_runway.name}",
    )
    session.transcript.append(Message(
        AgentRole.TASK_AGENT.value,
        f"extracted design task: procedure type:SID,runway:RWY{resolved_runway.name},"
        f"destination:{resolved_fix.name}",
        0,
        parsed={"kind": "task", "runway": resolved_runway.name, "destination": resolved_fix.name},
    ))
    return session


# --- prompt assembly ---------------------------------------------------------


def load_prompt(role: AgentRole) -> str:
    asset = {
        AgentRole.GROUP_MANAGER: "group_manager.txt",
        AgentRole.TASK_AGENT: "task_agent.txt",
        AgentRole.PLAN_AGENT: "plan_agent.txt",
        AgentRole.WAYPOINT_AGENT: "waypoint_agent.txt",
        AgentRole.CALCULATE_AGENT: "calculate_agent.txt",
        AgentRole.RENDER_AGENT: "render_agent.txt",
        AgentRole.FIX_WAYPOINT_AGENT: "fix_waypoint_agent.txt",
    }[role]
    return resources.files("fpdesign.prompts").joinpath(asset).read_text(encoding="utf-8")


def _format_waypoints(waypoints: list[GeoPoint]) -> str:
    return "[" + ",".join(f"[{p.lat:.6f},{p.lon:.6f}]" for p in waypoints) + "]"


def _format_obstacles(notable) -> str:
    if not notable:
        return "No notable obstacles"
    return ",".join(
        f"(name:{o.name},relative position:{s.bearing:.2f}°,distance:{s.distance:.1f}m)"
        for o, s in notable
    )


def _similar_line(kind: str, entry: ExperienceEntry | None) -> str:
    if entry is None:
        return f"similar sid procedure path from same {kind}: none"
    return (
        f"similar sid procedure path from same {kind}: sid runway:{entry.runway},"
        f"destination:{entry.destination},procedure path:{format_trace_for_prompt(entry)}"
    )


def build_plan_user_message(session: DesignSession, destination_step: PolarStep,
                            notable, same_runway, same_destination) -> str:
    index = session.round + 1
    return "\n".join([
        f"the planning sid procedure name:{session.procedure_name}",
        f"sid runway:RWY{session.runway.name}.",
        f"runway heading:{session.runway.heading:g}°.",
        f"runway name:{session.runway.name}.",
        f"destination:(name:{session.destination.name},relative position:"
        f"{destination_step.bearing:.2f}°,distance:{destination_step.distance:.1f}m)",
        _similar_line("sid runway", same_runway),
        _similar_line("destination", same_destination),
        f"notable obstacles:{_format_obstacles(notable)}",
        f"Finished waypoints: {_format_waypoints(session.waypoints)}",
        f"mission goal:plan {ordinal(index)} waypoint based on aboved information",
    ])


def build_waypoint_user_message(session: DesignSession, meta: MetaAction,
                                destination_step: PolarStep, notable) -> str:
    index = session.round + 1
    return "\n".join([
        f"Meta Action:{ordinal(index)} waypoint:{meta.label()}",
        f"destination:(name:{session.destination.name},relative position:"
        f"{destination_step.bearing:.2f}°,distance:{destination_step.distance:.1f}m)",
        f"notable obstacles:{_format_obstacles(notable)}",
        f"mission goal:plan {ordinal(index)} waypoint accurate position based on aboved information",
        "Think: step by step.",
    ])


# --- action-line parsers -----------------------------------------------------


@dataclass(frozen=True)
class ParsedPlan:
    action: MetaAction
    index: int | None


_META_LINE = re.compile(r"Meta Action\s*:\s*(.*)", re.IGNORECASE)
_ORDINAL = re.compile(r"(\d+)\s*(?:st|nd|rd|th)\s*waypoint", re.IGNORECASE)
_BUCKETS = re.compile(
    r"\(\s*(\d+(?:\.\d+)?)\s*-\s*(\d+(?:\.\d+)?)\s*°?\s*,\s*"
    r"(?:(\d+(?:\.\d+)?)\s*-\s*(\d+(?:\.\d+)?)|(\d+(?:\.\d+)?)\s*\+)\s*km\s*\)"
)
_PRECISE = re.compile(r"\(\s*(-?\d+(?:\.\d+)?)\s*°?\s*,\s*(-?\d+(?:\.\d+)?)\s*m?\s*\)")
_PRECISE_MARKER = re.compile(r"Accurate waypoint position\s*:", re.IGNORECASE)


def parse_meta_action(text: str) -> ParsedPlan:
    """Parse the final "Meta Action:" line into buckets or Arrival.

    Tolerates trailing noise after the buckets and a missing ordinal (the
    index is then recovered from session state by the caller).
    """
    matches = list(_META_LINE.finditer(text))
    payload = matches[-1].group(1) if matches else text

    index_match = _ORDINAL.search(payload)
    index = int(index_match.group(1)) if index_match else None

    if "arrival destination" in payload.lower():
        return ParsedPlan(MetaAction.arrival_marker(), index)

    buckets = _BUCKETS.search(payload)
    if not buckets:
        raise ParseError(f"no meta action in: {payload.strip()[:120]!r}")
    az = (float(buckets.group(1)), float(buckets.group(2)))
    if az[1] - az[0] != 45.0 or az[0] % 45.0 != 0.0 or not (0.0 <= az[0] < 360.0):
        raise ParseError(f"not a 45-degree azimuth octant: {az}")
    if buckets.group(5) is not None:
        dist = (float(buckets.group(5)), float("inf"))
    else:
        dist = (float(buckets.group(3)), float(buckets.group(4)))
    _validate_distance_bucket(dist, payload)
    return ParsedPlan(MetaAction(az, dist), index)


def _validate_distance_bucket(bucket: tuple[float, float], payload: str) -> None:
    from .experience import DISTANCE_EDGES_KM

    edges = list(zip(DISTANCE_EDGES_KM, DISTANCE_EDGES_KM[1:]))
    if bucket not in edges:
        raise ParseError(f"not a known distance band: {bucket} in {payload.strip()[:120]!r}")


def parse_precise_action(text: str) -> PolarStep:
    """Parse "(bearing°, distance m)" from the final accurate-position line.

    Exactly one position tuple is allowed; a reply proposing several
    waypoints at once is rejected.
    """
    markers = list(_PRECISE_MARKER.finditer(text))
    payload = text[markers[-1].end():] if markers else text
    tuples = _PRECISE.findall(payload)
    if len(tuples) != 1:
        raise ParseError(
            f"expected exactly one (bearing,distance) tuple, found {len(tuples)} "
            f"in: {payload.strip()[:120]!r}")
    bearing, distance = (float(v) for v in tuples[0])
    try:
        return PolarStep(bearing, distance)
    except ValueError as exc:
        raise ParseError(str(exc)) from exc


# --- the decision loop -------------------------------------------------------


def _call_with_retry(session: DesignSession, backend: Backend, role: AgentRole,
                     request: ChatRequest, parser):
    """One backend call with the hallucination protocol: an unparseable
    reply is counted per role and retried once; a second consecutive
    failure fails the session."""
    last_error: ParseError | None = None
    for _ in range(2):
        reply = backend.complete(request)
        try:
            return reply, parser(reply.text)
        except ParseError as exc:
            session.hallucinations[role.value] = session.hallucinations.get(role.value, 0) + 1
            log.warning("%s reply unparseable (%s); retrying", role.value, exc)
            last_error = exc
    session.status = SessionStatus.FAILED
    assert last_error is not None
    raise last_error


def _clamp_to_bucket(step: PolarStep, meta: MetaAction) -> PolarStep:
    """Waypoint-agent output must respect the plan bucket; out-of-bucket
    values are clamped to the nearest boundary and logged."""
    az_lo, az_hi = meta.azimuth_bucket
    lo_m = meta.distance_bucket_km[0] * 1000.0
    hi_m = meta.distance_bucket_km[1] * 1000.0

    bearing = step.bearing
    if not (az_lo <= bearing < az_hi):
        upper = az_hi - 1e-6
        bearing = az_lo if angular_difference(bearing, az_lo) <= angular_difference(bearing, upper) else upper

    distance = step.distance
    if distance < lo_m:
        distance = lo_m if lo_m > 0 else step.distance
    elif distance >= hi_m:
        distance = hi_m - 1e-6

    if (bearing, distance) != (step.bearing, step.distance):
        log.warning("waypoint step %s clamped into bucket %s", step, meta.label())
        return PolarStep(bearing, distance)
    return step


def step(session: DesignSession, backend: Backend, cancel=None) -> DesignSession:
    """Run one full design round, appending exactly one waypoint or
    terminating the session. `cancel` is an optional zero-argument callable
    checked between agent turns; when it returns True the round is rolled
    back and Cancelled is raised, leaving the session as it was."""
    if session.status is not SessionStatus.PLANNING:
        raise InvalidState(f"cannot step a session in status {session.status.value}")
    if session.round >= session.config.max_rounds:
        raise InvalidState("round budget already spent")

    transcript_mark = len(session.transcript)

    def check_cancel():
        if cancel is not None and cancel():
            del session.transcript[transcript_mark:]
            raise Cancelled("step cancelled between agent turns")

    origin = session.current_position
    destination_step = inverse(origin, session.destination.position)
    notable = tuple(notable_obstacles(
        origin, session.runway.der_elevation, session.obstacles, session.zone_config))
    similar_runway = _best_or_none(session, "runway")
    similar_destination = _best_or_none(session, "destination")

    round_no = session.round + 1
    session.transcript.append(Message(
        AgentRole.GROUP_MANAGER.value, "next speaker:PlanAgent", round_no))

    plan_view = PlanView(
        round_index=session.round,
        runway_heading=session.runway.heading,
        destination_step=destination_step,
        arrival_radius=session.config.arrival_radius,
        notable=notable,
        same_runway=similar_runway,
        same_destination=similar_destination,
    )
    check_cancel()
    plan_request = ChatRequest(
        messages=(
            ChatMessage("system", load_prompt(AgentRole.PLAN_AGENT)),
            ChatMessage("user", build_plan_user_message(
                session, destination_step, notable, similar_runway, similar_destination)),
        ),
        view=plan_view,
    )
    plan_reply, parsed_plan = _call_with_retry(
        session, backend, AgentRole.PLAN_AGENT, plan_request, parse_meta_action)
    meta = parsed_plan.action
    index = parsed_plan.index if parsed_plan.index is not None else round_no
    session.transcript.append(Message(
        AgentRole.PLAN_AGENT.value, plan_reply.text, round_no,
        parsed=_meta_payload(meta, index)))

    if meta.arrival:
        session.waypoints.append(session.destination.position)
        session.round += 1
        session.status = SessionStatus.COMPLETED
        _after_round(session, round_no)
        return session

    waypoint_view = WaypointView(
        round_index=session.round,
        runway_heading=session.runway.heading,
        meta=meta,
        destination_step=destination_step,
        notable=notable,
    )
    check_cancel()
    waypoint_request = ChatRequest(
        messages=(
            ChatMessage("system", load_prompt(AgentRole.WAYPOINT_AGENT)),
            ChatMessage("user", build_waypoint_user_message(
                session, meta, destination_step, notable)),
        ),
        view=waypoint_view,
    )
    waypoint_reply, raw_step = _call_with_retry(
        session, backend, AgentRole.WAYPOINT_AGENT, waypoint_request, parse_precise_action)
    precise = _clamp_to_bucket(raw_step, meta)
    session.transcript.append(Message(
        AgentRole.WAYPOINT_AGENT.value, waypoint_reply.text, round_no,
        parsed={"kind": "step", "bearing": precise.bearing, "distance": precise.distance,
                "clamped": precise != raw_step}))

    check_cancel()
    new_waypoint = forward_point(origin, precise)
    session.transcript.append(Message(
        AgentRole.CALCULATE_AGENT.value,
        json.dumps({"origin_lat": origin.lat, "origin_lon": origin.lon,
                    "bearing": precise.bearing, "distance": precise.distance})
        + f" -> [{new_waypoint.lat:.6f}, {new_waypoint.lon:.6f}]",
        round_no,
        parsed={"kind": "point", "lat": new_waypoint.lat, "lon": new_waypoint.lon}))

    from .geodesy import distance_between
    if distance_between(new_waypoint, session.destination.position) <= session.config.arrival_radius:
        # lands within the arrival radius: snap to the destination fix
        session.waypoints.append(session.destination.position)
        session.status = SessionStatus.COMPLETED
    else:
        session.waypoints.append(new_waypoint)
    session.round += 1
    if session.status is SessionStatus.PLANNING and session.round >= session.config.max_rounds:
        session.status = SessionStatus.EXHAUSTED
    _after_round(session, round_no)
    return session


def _after_round(session: DesignSession, round_no: int) -> None:
    if session.config.interactive:
        session.transcript.append(Message(
            AgentRole.RENDER_AGENT.value,
            f"rendered round {round_no}: {len(session.waypoints)} waypoints, "
            f"status {session.status.value}",
            round_no))
        session.status = SessionStatus.AWAITING_FEEDBACK


def _best_or_none(session: DesignSession, kind: str):
    from .experience import similar_same_destination, similar_same_runway

    if kind == "runway":
        found = similar_same_runway(
            session.memory, session.runway.name, session.destination.position)
    else:
        found = similar_same_destination(
            session.memory, session.destination.name, session.runway.heading)
    return found[0] if found else None


def _meta_payload(meta: MetaAction, index: int) -> dict:
    if meta.arrival:
        return {"kind": "meta", "arrival": True, "index": index}
    return {
        "kind": "meta", "arrival": False, "index": index,
        "azimuth": list(meta.azimuth_bucket),
        "distance_km": [meta.distance_bucket_km[0],
                        None if meta.distance_bucket_km[1] == float("inf")
                        else meta.distance_bucket_km[1]],
    }


def _derived_resume_status(session: DesignSession) -> SessionStatus:
    from .geodesy import distance_between

    if session.waypoints and distance_between(
            session.waypoints[-1], session.destination.position) <= session.config.arrival_radius:
        return SessionStatus.COMPLETED
    if session.round >= session.config.max_rounds:
        return SessionStatus.EXHAUSTED
    return SessionStatus.PLANNING


def apply_fix(session: DesignSession, cmd: FixCommand) -> DesignSession:
    """Apply structured human feedback while the session is paused.

    no_fix resumes with the status the last round earned. fix replaces the
    addressed waypoint with forward(anchor, (bearing, distance)) — anchor
    being the supplied coordinates when present, else the stored
    predecessor — and discards every later waypoint so subsequent rounds
    re-plan from the corrected point. The round counter is untouched.
    """
    if session.status is not SessionStatus.AWAITING_FEEDBACK:
        raise InvalidState(f"no feedback expected in status {session.status.value}")

    session.transcript.append(Message(
        AgentRole.FIX_WAYPOINT_AGENT.value,
        f"human feedback:{cmd.action}"
        + ("" if cmd.action == "no_fix"
           else f",fix_waypoint:{cmd.fix_waypoint},fix_bearing:{cmd.bearing},"
                f"fix_distance:{cmd.distance}"),
        session.round,
        parsed={"kind": "fix", "action": cmd.action, "fix_waypoint": cmd.fix_waypoint,
                "bearing": cmd.bearing, "distance": cmd.distance}))

    if cmd.action == "no_fix":
        session.status = _derived_resume_status(session)
        return session

    index = cmd.fix_waypoint
    if not (1 <= index <= len(session.waypoints)):
        raise IndexOutOfRange(
            f"fix_waypoint {index} outside 1..{len(session.waypoints)}")
    try:
        step_cmd = PolarStep(cmd.bearing, cmd.distance)
    except ValueError as exc:
        raise InvalidStep(str(exc)) from exc

    if cmd.last_waypoint_lat is not None:
        try:
            anchor = GeoPoint(cmd.last_waypoint_lat, cmd.last_waypoint_lon)
        except ValueError as exc:
            raise InvalidStep(str(exc)) from exc
    elif index == 1:
        anchor = session.runway.threshold
    else:
        anchor = session.waypoints[index - 2]

    moved = forward_point(anchor, step_cmd)
    del session.waypoints[index - 1:]
    session.waypoints.append(moved)
    session.status = _derived_resume_status(session)
    return session


def first_leg_compliant(session: DesignSession) -> bool:
    """Whether the runway-to-first-waypoint bearing stays within the
    configured offset of the runway heading."""
    if not session.waypoints:
        raise InvalidState("no waypoints designed yet")
    first = inverse(session.runway.threshold, session.waypoints[0])
    return angular_difference(first.bearing, session.runway.heading) <= session.config.first_leg_max_offset
