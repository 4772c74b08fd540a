"""Exception hierarchy shared across the stack."""


class AirstarError(Exception):
    """Base class for all errors raised by this package."""


# -- scenario / world ------------------------------------------------------

class SchemaError(AirstarError):
    """Scenario file is missing a field or has a wrong type."""


class ConsistencyError(AirstarError):
    """Scenario is well-formed but internally inconsistent."""


# -- geo-nav ---------------------------------------------------------------

class OutOfRegion(AirstarError):
    """Point too far from the reference for the flat-earth projection."""


class NotFound(AirstarError):
    """No landmark matches the query."""


class MissingGrid(AirstarError):
    """The scenario lacks the occupancy grid required by the mission kind."""


class StartBlocked(AirstarError):
    pass


class GoalBlocked(AirstarError):
    pass


class NoPath(AirstarError):
    pass


class SmoothingFailed(AirstarError):
    """Clearance could not be repaired within the iteration budget."""


# -- object-nav / skills ---------------------------------------------------

class NoTarget(AirstarError):
    """Grounding produced no target for the instruction or click."""


class BackendUnavailable(AirstarError):
    """A remote backend timed out or refused; callers may replan."""


class InvalidDepth(AirstarError):
    """Depth sample is non-finite or non-positive (e.g. sky pixel)."""


class NoHumanVisible(AirstarError):
    pass


class TargetLost(AirstarError):
    """Tracked target unseen for longer than the lost threshold."""


class DegenerateGeometry(AirstarError):
    pass


class NoInformativeView(AirstarError):
    """Every scanned candidate view scored zero."""


# -- planner ---------------------------------------------------------------

class PlanRejected(AirstarError):
    """Backend plan failed registry validation."""


class NoMatch(AirstarError):
    """Mock planner grammar has no rule for the instruction."""


class MissionFailed(AirstarError):
    """Replanning attempts exhausted; carries the execution logs."""

    def __init__(self, message, logs=None):
        super().__init__(message)
        self.logs = list(logs or [])


# -- station ---------------------------------------------------------------

class DecodeError(AirstarError):
    """Wire line is not a valid message."""


class IllegalTransition(AirstarError):
    """Mission state machine rejected a transition."""
