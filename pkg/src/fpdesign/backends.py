"""Pluggable decision backends for the design loop.

Three interchangeable sources of planner/waypoint replies sit behind one
`complete(request)` call:

* RemoteBackend posts the assembled prompt, byte-exact, to any
  OpenAI-compatible chat-completions endpoint.
* ScriptedBackend is a frozen deterministic policy so the whole pipeline
  (and its metrics) runs offline. It is a stand-in, not an imitation of any
  particular model; its rules are documented on `scripted_plan`.
* ReplayBackend feeds back previously recorded assistant messages, the
  regression harness for transcripts.

Scripted replies are wrapped in the same "Thoughts: ... / action line"
textual format the orchestrator's parsers expect, so every backend is
parsed identically.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field

import requests

from .errors import (
    BackendTimeout,
    HTTPStatusError,
    MalformedReply,
    ScriptExhausted,
)
from .experience import (
    DISTANCE_EDGES_KM,
    ExperienceEntry,
    MetaAction,
    azimuth_bucket_for,
    distance_bucket_for,
    ordinal,
)
from .geodesy import PolarStep, angular_difference, normalize_bearing
from .navdata import Obstacle

ARRIVAL_PLAN_RADIUS_M = 30_000.0
DISTANCE_EDGE_MARGIN_M = 100.0
BEARING_EDGE_MARGIN_DEG = 0.1
OBSTACLE_CONE_DEG = 22.5


@dataclass(frozen=True)
class ChatMessage:
    role: str  # "system" | "user" | "assistant"
    content: str


@dataclass(frozen=True)
class ChatRequest:
    messages: tuple[ChatMessage, ...]
    model: str = "scripted"
    temperature: float = 0.0
    timeout: float = 60.0
    # Structured session view for backends that do not read prose; never
    # serialized to the wire.
    view: object | None = None

    def __post_init__(self):
        if not self.messages:
            raise ValueError("message list must be non-empty")
        if self.messages[0].role != "system":
            raise ValueError("first message must be the system prompt")


@dataclass(frozen=True)
class ChatReply:
    text: str
    prompt_tokens: int = 0
    completion_tokens: int = 0
    latency: float = 0.0


@dataclass(frozen=True)
class PlanView:
    """What the planner knows at decision time."""

    round_index: int
    runway_heading: float
    destination_step: PolarStep
    arrival_radius: float
    notable: tuple[tuple[Obstacle, PolarStep], ...] = ()
    same_runway: ExperienceEntry | None = None
    same_destination: ExperienceEntry | None = None


@dataclass(frozen=True)
class WaypointView:
    """What the waypoint refiner knows: the plan bucket plus the same cues."""

    round_index: int
    runway_heading: float
    meta: MetaAction
    destination_step: PolarStep
    notable: tuple[tuple[Obstacle, PolarStep], ...] = ()


class Backend:
    kind = "abstract"

    def complete(self, request: ChatRequest) -> ChatReply:
        raise NotImplementedError


# --- scripted policy ---------------------------------------------------------


def _bucket_span_m(bucket_km: tuple[float, float]) -> tuple[float, float]:
    lo, hi = bucket_km
    return lo * 1000.0, (hi * 1000.0 if math.isfinite(hi) else math.inf)


def _min_distance_bucket(a: tuple[float, float], b: tuple[float, float]) -> tuple[float, float]:
    return a if a[0] <= b[0] else b


def scripted_plan(view: PlanView) -> MetaAction:
    """Deterministic planning policy, frozen for reproducibility:

    1. Arrival once the destination is within 30 km (or the arrival radius,
       whichever is larger).
    2. Reuse the same-runway similar trace's meta action for this round
       index when one exists (Arrival elements are never reused; arrival is
       rule 1's call).
    3. Otherwise greedy: the azimuth octant containing the destination
       bearing, and the smaller of the 30-50 km band and the band containing
       the remaining distance.
    4. Round 0 overrides the azimuth octant with the one containing the
       runway heading, and the distance band with 0-10 km unless a reused
       trace element supplied one.
    5. After round 0, if a notable obstacle sits inside the chosen octant
       (within 22.5 deg of its center) and nearer than the chosen band's
       upper bound, rotate one octant away from the obstacle's side.
    """
    remaining = view.destination_step.distance
    if remaining <= max(ARRIVAL_PLAN_RADIUS_M, view.arrival_radius):
        return MetaAction.arrival_marker()

    reused = _reusable_trace_action(view)
    if reused is not None:
        azimuth, distance = reused.azimuth_bucket, reused.distance_bucket_km
    else:
        azimuth = azimuth_bucket_for(view.destination_step.bearing)
        distance = _min_distance_bucket((30.0, 50.0), distance_bucket_for(remaining))

    if view.round_index == 0:
        azimuth = azimuth_bucket_for(view.runway_heading)
        if reused is None:
            distance = (DISTANCE_EDGES_KM[0], DISTANCE_EDGES_KM[1])
        return MetaAction(azimuth, distance)

    azimuth = _rotate_away_from_obstacle(azimuth, distance, view.notable)
    return MetaAction(azimuth, distance)


def _reusable_trace_action(view: PlanView) -> MetaAction | None:
    if view.same_runway is None:
        return None
    index = view.round_index + 1
    for element in view.same_runway.trace:
        if element.index == index and not element.action.arrival:
            return element.action
    return None


def _rotate_away_from_obstacle(
    azimuth: tuple[float, float],
    distance_km: tuple[float, float],
    notable: tuple[tuple[Obstacle, PolarStep], ...],
) -> tuple[float, float]:
    center = (azimuth[0] + azimuth[1]) / 2.0
    _, reach = _bucket_span_m(distance_km)
    threats = [
        step for _, step in notable
        if angular_difference(step.bearing, center) <= OBSTACLE_CONE_DEG and step.distance < reach
    ]
    if not threats:
        return azimuth
    nearest = min(threats, key=lambda s: s.distance)
    signed = (nearest.bearing - center + 180.0) % 360.0 - 180.0
    shift = -45.0 if signed >= 0.0 else 45.0
    lo = normalize_bearing(azimuth[0] + shift)
    return (lo, lo + 45.0)


def scripted_waypoint(view: WaypointView) -> PolarStep:
    """Refine a plan bucket into a precise step: the destination bearing
    (round 0: the runway heading) clamped into the azimuth octant, and the
    remaining distance clamped 100 m inside the distance band."""
    meta = view.meta
    if meta.arrival:
        raise ValueError("waypoint refinement is undefined for Arrival")
    target = view.runway_heading if view.round_index == 0 else view.destination_step.bearing
    bearing = _clamp_bearing(target, meta.azimuth_bucket)
    lo_m, hi_m = _bucket_span_m(meta.distance_bucket_km)
    distance = max(lo_m + DISTANCE_EDGE_MARGIN_M, view.destination_step.distance)
    if math.isfinite(hi_m):
        distance = min(hi_m - DISTANCE_EDGE_MARGIN_M, distance)
    return PolarStep(bearing, distance)


def _clamp_bearing(bearing: float, bucket: tuple[float, float]) -> float:
    lo, hi = bucket
    b = normalize_bearing(bearing)
    span = (b - lo) % 360.0
    if span < (hi - lo):
        return b
    upper = hi - BEARING_EDGE_MARGIN_DEG
    if angular_difference(b, lo) <= angular_difference(b, upper):
        return lo
    return normalize_bearing(upper)


class ScriptedBackend(Backend):
    kind = "scripted"

    def complete(self, request: ChatRequest) -> ChatReply:
        view = request.view
        if isinstance(view, PlanView):
            return ChatReply(_plan_text(view, scripted_plan(view)))
        if isinstance(view, WaypointView):
            return ChatReply(_waypoint_text(view, scripted_waypoint(view)))
        raise ValueError(f"scripted backend got no usable view: {type(view).__name__}")


def _plan_text(view: PlanView, action: MetaAction) -> str:
    index = view.round_index + 1
    lines = [
        "Thoughts:",
        f" -the distance to destination is {view.destination_step.distance:.1f}m",
        f" -planning goal:plan {ordinal(index)} waypoint.",
    ]
    if view.notable:
        obstacle, step = view.notable[0]
        lines.append(
            f" -notable obstacles:(name:{obstacle.name},relative position:"
            f"{step.bearing:.2f}°,distance:{step.distance:.1f}m)"
        )
    else:
        lines.append(" -notable obstacles:No notable obstacles")
    if action.arrival:
        lines.append(f"Meta Action:{ordinal(index)} waypoint:arrival destination!")
    else:
        lines.append(f"Meta Action:{ordinal(index)} waypoint:{action.label()}")
    return "\n".join(lines)


def _waypoint_text(view: WaypointView, step: PolarStep) -> str:
    index = view.round_index + 1
    return "\n".join([
        "Thoughts:",
        f" -goal:plan {ordinal(index)} waypoint accurate position.",
        f" -meta action:{view.meta.label()}",
        f"Accurate waypoint position:({step.bearing:.2f}°,{step.distance:.1f}m)",
    ])


# --- replay ------------------------------------------------------------------


class ReplayBackend(Backend):
    """Feed back recorded assistant messages in order."""

    kind = "replay"

    def __init__(self, script: list[str]):
        self.script = list(script)
        self.cursor = 0

    def complete(self, request: ChatRequest) -> ChatReply:
        if self.cursor >= len(self.script):
            raise ScriptExhausted(f"script exhausted after {self.cursor} replies")
        text = self.script[self.cursor]
        self.cursor += 1
        return ChatReply(text)

    def reset(self) -> None:
        self.cursor = 0

    @classmethod
    def from_transcript_jsonl(cls, text: str) -> "ReplayBackend":
        """Build a script from a session transcript: the backend-authored
        messages are the PlanAgent and WaypointAgent entries, in order."""
        script = []
        for line in text.splitlines():
            if not line.strip():
                continue
            record = json.loads(line)
            if record.get("role") in ("PlanAgent", "WaypointAgent"):
                script.append(record["content"])
        return cls(script)


# --- remote ------------------------------------------------------------------


@dataclass
class RemoteBackend(Backend):
    """OpenAI-compatible chat-completions client: temperature 0, one retry
    with backoff on 429/5xx, 60 s timeout by default."""

    base_url: str
    api_key: str = ""
    model: str = "gpt-3.5-turbo"
    temperature: float = 0.0
    timeout: float = 60.0
    max_retries: int = 1
    backoff: float = 0.5
    kind: str = field(default="remote", init=False)

    @classmethod
    def from_env(cls, environ) -> "RemoteBackend":
        base_url = environ.get("FPDESIGN_LLM_BASE_URL", "")
        if not base_url:
            raise ValueError("FPDESIGN_LLM_BASE_URL is not configured")
        return cls(
            base_url=base_url,
            api_key=environ.get("FPDESIGN_LLM_API_KEY", ""),
            model=environ.get("FPDESIGN_LLM_MODEL", "gpt-3.5-turbo"),
        )

    def complete(self, request: ChatRequest) -> ChatReply:
        url = self.base_url.rstrip("/") + "/chat/completions"
        body = {
            "model": self.model or request.model,
            "temperature": self.temperature,
            "messages": [{"role": m.role, "content": m.content} for m in request.messages],
        }
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"

        started = time.monotonic()
        last_status: tuple[int, str] | None = None
        for attempt in range(self.max_retries + 1):
            try:
                response = requests.post(url, json=body, headers=headers, timeout=self.timeout)
            except requests.Timeout as exc:
                raise BackendTimeout(f"no reply within {self.timeout}s") from exc
            except requests.RequestException as exc:
                raise BackendTimeout(f"transport failure: {exc}") from exc
            if response.status_code == 200:
                return self._extract(response, time.monotonic() - started)
            last_status = (response.status_code, response.text)
            if response.status_code in (429,) or response.status_code >= 500:
                if attempt < self.max_retries:
                    time.sleep(self.backoff * (attempt + 1))
                    continue
            break
        assert last_status is not None
        raise HTTPStatusError(*last_status)

    @staticmethod
    def _extract(response, latency: float) -> ChatReply:
        try:
            payload = response.json()
        except ValueError as exc:
            raise MalformedReply("reply body is not JSON") from exc
        try:
            text = payload["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise MalformedReply(f"no choices in reply: {json.dumps(payload)[:200]}") from exc
        if not isinstance(text, str):
            raise MalformedReply("message content is not text")
        usage = payload.get("usage") or {}
        return ChatReply(
            text,
            prompt_tokens=int(usage.get("prompt_tokens", 0) or 0),
            completion_tokens=int(usage.get("completion_tokens", 0) or 0),
            latency=latency,
        )
