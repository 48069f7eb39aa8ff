"""Exception taxonomy shared across the engine."""


class FpDesignError(Exception):
    """Base class for all engine errors."""


# --- data / schema ---------------------------------------------------------

class ParseError(FpDesignError):
    """Malformed input text (JSON, TXT export, agent action line)."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class SchemaError(FpDesignError):
    """A structurally valid document missing or mistyping a required field."""

    def __init__(self, message: str, path: str = ""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


class CrossReferenceError(FpDesignError):
    """A record names a runway/fix that does not resolve."""


class NotFound(FpDesignError):
    """Lookup key absent from the database or session store."""

    def __init__(self, kind: str, key: str):
        super().__init__(f"{kind} not found: {key!r}")
        self.kind = kind
        self.key = key


# --- geometry --------------------------------------------------------------

class PolarRegion(FpDesignError):
    """Origin latitude too close to a pole; longitude ill-conditioned."""


class CoincidentPoints(FpDesignError):
    """Inverse geodesic requested between points closer than 0.1 m."""


class DegenerateLeg(FpDesignError):
    """Consecutive procedure waypoints coincide."""


# --- session / protocol ----------------------------------------------------

class InvalidState(FpDesignError):
    """Operation not permitted in the session's current status."""


class Cancelled(FpDesignError):
    """Step cancelled cooperatively between agent turns."""


class IndexOutOfRange(FpDesignError):
    """Fix command addressed a waypoint index the session does not have."""


class InvalidStep(FpDesignError):
    """Fix command carried an unusable bearing/distance."""


class EmptyProcedure(FpDesignError):
    """Export requested for a session without waypoints."""


class MetricUndefined(FpDesignError):
    """Metric denominator is zero."""


# --- backends --------------------------------------------------------------

class BackendError(FpDesignError):
    """Base for decision-backend failures (transport, protocol)."""


class BackendTimeout(BackendError):
    """Remote endpoint did not answer within the configured timeout."""


class HTTPStatusError(BackendError):
    """Remote endpoint answered with a non-success status."""

    def __init__(self, status_code: int, body: str):
        super().__init__(f"HTTP {status_code}: {body[:200]}")
        self.status_code = status_code
        self.body = body


class MalformedReply(BackendError):
    """Remote endpoint answered 200 but the payload is not a chat completion."""


class ScriptExhausted(BackendError):
    """Replay backend ran out of recorded messages."""
