"""Mission lifecycle state machine."""
from __future__ import annotations

from enum import Enum

from ..errors import IllegalTransition


class MissionState(str, Enum):
    grounded = "grounded"
    ascending = "ascending"
    standby_hover = "standby_hover"
    planning = "planning"
    executing = "executing"
    replanning = "replanning"
    returning = "returning"
    mission_failed = "mission_failed"


class MissionEvent(str, Enum):
    activate = "activate"
    ascended = "ascended"
    command = "command"
    plan_ready = "plan_ready"
    plan_failed = "plan_failed"
    step_failed = "step_failed"
    plan_complete = "plan_complete"
    abort = "abort"
    exhausted = "exhausted"
    returned = "returned"
    ack = "ack"


TRANSITIONS: dict[tuple[MissionState, MissionEvent], MissionState] = {
    (MissionState.grounded, MissionEvent.activate): MissionState.ascending,
    (MissionState.ascending, MissionEvent.ascended): MissionState.standby_hover,
    (MissionState.standby_hover, MissionEvent.command): MissionState.planning,
    (MissionState.planning, MissionEvent.plan_ready): MissionState.executing,
    (MissionState.planning, MissionEvent.plan_failed): MissionState.replanning,
    (MissionState.executing, MissionEvent.step_failed): MissionState.replanning,
    (MissionState.executing, MissionEvent.plan_complete): MissionState.returning,
    (MissionState.executing, MissionEvent.abort): MissionState.returning,
    (MissionState.replanning, MissionEvent.plan_ready): MissionState.executing,
    (MissionState.replanning, MissionEvent.exhausted): MissionState.mission_failed,
    (MissionState.returning, MissionEvent.returned): MissionState.standby_hover,
    (MissionState.mission_failed, MissionEvent.ack): MissionState.standby_hover,
}


class MissionStateMachine:
    def __init__(self, state: MissionState = MissionState.grounded):
        self.state = state
        self.active_plan_id: str | None = None

    def can(self, event: MissionEvent) -> bool:
        return (self.state, event) in TRANSITIONS

    def apply(self, event: MissionEvent) -> MissionState:
        key = (self.state, event)
        if key not in TRANSITIONS:
            raise IllegalTransition(f"{event.value} not allowed in state {self.state.value}")
        self.state = TRANSITIONS[key]
        if self.state in (MissionState.standby_hover, MissionState.mission_failed):
            self.active_plan_id = None
        return self.state
