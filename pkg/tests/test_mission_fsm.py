import itertools

import pytest

from airstar.errors import IllegalTransition
from airstar.station.mission import (MissionEvent, MissionState,
                                     MissionStateMachine, TRANSITIONS)

# Independent copy of the legal-transition list, written out by hand rather
# than derived from the implementation table. The planning -> replanning edge
# covers plan construction failing before any step runs.
LEGAL = [
    ("grounded", "activate", "ascending"),
    ("ascending", "ascended", "standby_hover"),
    ("standby_hover", "command", "planning"),
    ("planning", "plan_ready", "executing"),
    ("planning", "plan_failed", "replanning"),
    ("executing", "step_failed", "replanning"),
    ("executing", "plan_complete", "returning"),
    ("executing", "abort", "returning"),
    ("replanning", "plan_ready", "executing"),
    ("replanning", "exhausted", "mission_failed"),
    ("returning", "returned", "standby_hover"),
    ("mission_failed", "ack", "standby_hover"),
]


def test_exhaustive_state_event_matrix():
    legal = {(s, e): d for s, e, d in LEGAL}
    for state, event in itertools.product(MissionState, MissionEvent):
        fsm = MissionStateMachine(state)
        expected = legal.get((state.value, event.value))
        if expected is None:
            with pytest.raises(IllegalTransition):
                fsm.apply(event)
            assert fsm.state == state
            assert not fsm.can(event)
        else:
            assert fsm.can(event)
            assert fsm.apply(event) == MissionState(expected)


def test_table_matches_oracle_exactly():
    assert {(s.value, e.value, d.value) for (s, e), d in TRANSITIONS.items()} \
        == set(map(tuple, LEGAL))


def test_full_mission_walk():
    fsm = MissionStateMachine()
    for event in ("activate", "ascended", "command", "plan_ready",
                  "step_failed", "plan_ready", "plan_complete", "returned"):
        fsm.apply(MissionEvent(event))
    assert fsm.state == MissionState.standby_hover


def test_plan_id_cleared_on_terminal_states():
    fsm = MissionStateMachine(MissionState.replanning)
    fsm.active_plan_id = "plan-x"
    fsm.apply(MissionEvent.exhausted)
    assert fsm.active_plan_id is None

    fsm = MissionStateMachine(MissionState.returning)
    fsm.active_plan_id = "plan-y"
    fsm.apply(MissionEvent.returned)
    assert fsm.active_plan_id is None


def test_illegal_transition_message_names_both():
    fsm = MissionStateMachine(MissionState.grounded)
    with pytest.raises(IllegalTransition, match="abort.*grounded"):
        fsm.apply(MissionEvent.abort)
