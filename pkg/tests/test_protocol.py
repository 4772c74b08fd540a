import json

import pytest
from hypothesis import given, settings, strategies as st

from airstar.errors import DecodeError
from airstar.station.protocol import (Abort, Ack, Answer, Click, Command,
                                      Event, FrameMeta, Gesture,
                                      MESSAGE_TYPES, PlanMessage, Setpoint,
                                      StepUpdate, Telemetry,
                                      TrajectoryMessage, decode, encode)

finite = st.floats(allow_nan=False, allow_infinity=False, width=32)
text = st.text(max_size=40)
jdict = st.dictionaries(st.text(min_size=1, max_size=8),
                        st.one_of(finite, text, st.integers(-10**6, 10**6)),
                        max_size=4)

message = st.one_of(
    st.builds(Command, text=text),
    st.builds(Click, u=finite, v=finite),
    st.builds(Gesture, dir=st.sampled_from(["up", "down", "left", "right",
                                            "forward", "backward"])),
    st.builds(Abort),
    st.builds(Ack),
    st.builds(Telemetry, tick=st.integers(0, 10**6), pose=jdict,
              mode=st.sampled_from(["grounded", "flying"]),
              mission_state=st.one_of(st.none(), text)),
    st.builds(PlanMessage, plan=jdict),
    st.builds(StepUpdate, index=st.integers(0, 20),
              status=st.sampled_from(["pending", "running", "succeeded",
                                      "failed"]),
              cause=st.one_of(st.none(), text)),
    st.builds(FrameMeta, tick=st.integers(0, 10**6),
              objects=st.lists(jdict, max_size=3), camera=jdict,
              pose_at_capture=jdict),
    st.builds(Answer, text=text),
    st.builds(TrajectoryMessage,
              points=st.lists(st.lists(finite, min_size=3, max_size=3),
                              max_size=5)),
    st.builds(Event, level=st.sampled_from(["info", "warn", "error"]),
              text=text, replay=st.booleans()),
    st.builds(Setpoint, kind=text, data=jdict),
)


class TestRoundTrip:
    @given(message)
    @settings(max_examples=1000, deadline=None)
    def test_encode_decode_identity(self, msg):
        line = encode(msg)
        assert "\n" not in line
        assert decode(line) == msg

    @given(message)
    @settings(max_examples=200, deadline=None)
    def test_encoding_deterministic_and_sorted(self, msg):
        line = encode(msg)
        assert line == encode(decode(line))
        doc = json.loads(line)
        assert list(doc) == sorted(doc)

    def test_every_type_registered(self):
        assert set(MESSAGE_TYPES) == {
            "command", "click", "gesture", "abort", "ack", "telemetry",
            "plan", "step_update", "frame_meta", "answer", "trajectory",
            "event", "setpoint"}


class TestDecodeErrors:
    def test_bad_json(self):
        with pytest.raises(DecodeError):
            decode("{not json")

    def test_non_object(self):
        with pytest.raises(DecodeError):
            decode("[1,2,3]")

    def test_missing_type(self):
        with pytest.raises(DecodeError):
            decode('{"text":"hi"}')

    def test_unknown_type(self):
        with pytest.raises(DecodeError, match="warp"):
            decode('{"type":"warp","x":1}')

    def test_extra_field_rejected(self):
        with pytest.raises(DecodeError, match="speed"):
            decode('{"type":"click","u":1.0,"v":2.0,"speed":9}')

    def test_missing_fields_take_defaults(self):
        msg = decode('{"type":"command"}')
        assert msg == Command(text="")
