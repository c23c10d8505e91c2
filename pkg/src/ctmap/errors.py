"""Exception hierarchy for the ctmap toolkit."""


class CTMapError(Exception):
    """Base class for all toolkit errors."""


# --- scene / environment ---

class SchemaError(CTMapError):
    """Scene document is missing a field or has a mistyped field."""


class ValidationError(CTMapError):
    """Scene geometry violates an invariant (overlap, out of bounds, ...)."""


class PlacementError(CTMapError):
    """Random generation exhausted its retry budget."""


# --- propagation ---

class NoStationError(CTMapError):
    """Coverage requested with no base stations."""


class InvalidParams(CTMapError):
    """Propagation parameters violate their invariants."""


class OutOfBounds(CTMapError):
    """Cell index outside the grid."""


class FormatError(CTMapError):
    """Coverage file is corrupt (bad magic, truncated grid, bad dims)."""


# --- graph / routing ---

class EmptyGraph(CTMapError):
    """Every cell of the map is blocked."""


class NotAdjacent(CTMapError):
    """Edge cost queried for a non-adjacent cell pair."""


class Unreachable(CTMapError):
    """No path exists between the requested endpoints."""


class InvalidEndpoint(CTMapError):
    """Source or destination is blocked or out of bounds."""


class TooLarge(CTMapError):
    """Graph exceeds the brute-force node cap."""


# --- dataset ---

class ExhaustedError(CTMapError):
    """Pair sampling retry budget exhausted."""


class UnknownTemplate(CTMapError):
    """Unknown query template id."""


class EmptyDataset(CTMapError):
    """Split requested on an empty record list."""


class ParseError(CTMapError):
    """Malformed dataset line."""

    def __init__(self, message, line_no=None):
        super().__init__(message)
        self.line_no = line_no


# --- evaluation ---

class EndpointMismatch(CTMapError):
    """Metric comparing routes with different endpoints."""


class InvalidRoute(CTMapError):
    """Metric invoked on an invalid route."""


class EmptyPath(CTMapError):
    """Metric invoked on an empty coordinate sequence."""


class OracleFailure(CTMapError):
    """Oracle planner could not produce a reference route for a pair."""


# --- llm bridge ---

class ParseFailure(CTMapError):
    """Planner output does not conform to the route grammar."""

    def __init__(self, message, position=0):
        super().__init__(message)
        self.position = position


class RemoteError(CTMapError):
    """Base class for remote planner client failures."""


class TransportError(RemoteError):
    """Network failure or non-auth HTTP error after retries."""


class AuthError(RemoteError):
    """HTTP 401/403 from the remote endpoint; never retried."""


class RateLimited(RemoteError):
    """HTTP 429 persisting after all retries."""


class MalformedResponse(RemoteError):
    """Remote response body lacks the expected content field."""
