"""NDJSON wire protocol: one JSON object per line over a WebSocket text frame."""
from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from typing import Optional

from ..errors import DecodeError


@dataclass
class WireMessage:
    TYPE = ""

    def to_dict(self) -> dict:
        d = {"type": self.TYPE}
        for f in fields(self):
            d[f.name] = getattr(self, f.name)
        return d


# -- client -> station -----------------------------------------------------

@dataclass
class Command(WireMessage):
    TYPE = "command"
    text: str = ""


@dataclass
class Click(WireMessage):
    TYPE = "click"
    u: float = 0.0
    v: float = 0.0


@dataclass
class Gesture(WireMessage):
    TYPE = "gesture"
    dir: str = "up"


@dataclass
class Abort(WireMessage):
    TYPE = "abort"


@dataclass
class Ack(WireMessage):
    """Operator acknowledgment clearing a failed mission."""
    TYPE = "ack"


# -- station -> client -----------------------------------------------------

@dataclass
class Telemetry(WireMessage):
    TYPE = "telemetry"
    tick: int = 0
    pose: dict = field(default_factory=dict)
    mode: str = "grounded"
    mission_state: Optional[str] = None


@dataclass
class PlanMessage(WireMessage):
    TYPE = "plan"
    plan: dict = field(default_factory=dict)


@dataclass
class StepUpdate(WireMessage):
    TYPE = "step_update"
    index: int = 0
    status: str = "pending"
    cause: Optional[str] = None


@dataclass
class FrameMeta(WireMessage):
    TYPE = "frame_meta"
    tick: int = 0
    objects: list = field(default_factory=list)
    camera: dict = field(default_factory=dict)
    pose_at_capture: dict = field(default_factory=dict)


@dataclass
class Answer(WireMessage):
    TYPE = "answer"
    text: str = ""


@dataclass
class TrajectoryMessage(WireMessage):
    """Sampled polyline of the active smoothed trajectory, for the map view."""
    TYPE = "trajectory"
    points: list = field(default_factory=list)


@dataclass
class Event(WireMessage):
    TYPE = "event"
    level: str = "info"
    text: str = ""
    replay: bool = False


# -- station <-> onboard ---------------------------------------------------

@dataclass
class Setpoint(WireMessage):
    """Directive for the onboard tier; `kind` selects the behavior."""
    TYPE = "setpoint"
    kind: str = "hover"
    data: dict = field(default_factory=dict)


MESSAGE_TYPES = {cls.TYPE: cls for cls in
                 (Command, Click, Gesture, Abort, Ack, Telemetry, PlanMessage,
                  StepUpdate, FrameMeta, Answer, TrajectoryMessage, Event,
                  Setpoint)}


def encode(msg: WireMessage) -> str:
    """One-line deterministic JSON."""
    return json.dumps(msg.to_dict(), sort_keys=True, separators=(",", ":"))


def decode(line: str) -> WireMessage:
    try:
        doc = json.loads(line)
    except json.JSONDecodeError as e:
        raise DecodeError(f"not valid JSON: {e}") from e
    if not isinstance(doc, dict) or "type" not in doc:
        raise DecodeError("message must be an object with a 'type' field")
    cls = MESSAGE_TYPES.get(doc["type"])
    if cls is None:
        raise DecodeError(f"unknown message type '{doc['type']}'")
    kwargs = {k: v for k, v in doc.items() if k != "type"}
    names = {f.name for f in fields(cls)}
    extra = set(kwargs) - names
    if extra:
        raise DecodeError(f"unexpected fields for '{doc['type']}': {sorted(extra)}")
    try:
        return cls(**kwargs)
    except TypeError as e:
        raise DecodeError(str(e)) from e
