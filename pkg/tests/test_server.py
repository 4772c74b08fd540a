import json
import time

import pytest
from fastapi.testclient import TestClient

from airstar.station import CombinedRunner
from airstar.station.server import (SocketEndpoint, create_app,
                                    create_replay_app, create_station_app)
from airstar.station.station import StationAgent
from airstar.world.scenario import load_scenario_dict

from conftest import SCENARIO


@pytest.fixture(scope="module")
def scenario_doc():
    return json.loads(SCENARIO.read_text())


def recv_until(ws, msg_type, limit=200):
    for _ in range(limit):
        doc = json.loads(ws.receive_text())
        if doc["type"] == msg_type:
            return doc
    raise AssertionError(f"no '{msg_type}' within {limit} messages")


class TestLiveApp:
    def test_scenario_and_stream(self, scenario_doc):
        runner = CombinedRunner(SCENARIO, seed=7)
        assert runner.wait_for_standby()
        app = create_app(runner, scenario_doc)
        with TestClient(app) as client:
            assert client.get("/scenario").json() == scenario_doc
            with client.websocket_connect("/ws") as ws:
                tel = recv_until(ws, "telemetry")
                assert tel["mission_state"] == "standby_hover"
                assert len(tel["pose"]["position"]) == 3
                meta = recv_until(ws, "frame_meta")
                assert meta["camera"]["width"] == 64

    def test_command_over_websocket_yields_plan(self, scenario_doc):
        runner = CombinedRunner(SCENARIO, seed=7)
        assert runner.wait_for_standby()
        with TestClient(create_app(runner, scenario_doc)) as client:
            with client.websocket_connect("/ws") as ws:
                ws.send_text(json.dumps(
                    {"type": "command", "text": "Take my picture."}))
                plan = recv_until(ws, "plan")
                assert [s["tool"] for s in plan["plan"]["steps"]] == \
                    ["frame_human", "gesture_session"]

    def test_malformed_line_reported_as_event(self, scenario_doc):
        runner = CombinedRunner(SCENARIO, seed=7)
        assert runner.wait_for_standby()
        with TestClient(create_app(runner, scenario_doc)) as client:
            with client.websocket_connect("/ws") as ws:
                ws.send_text("{broken")
                for _ in range(200):
                    doc = json.loads(ws.receive_text())
                    if doc["type"] == "event" and \
                            doc["text"].startswith("decode_error"):
                        break
                else:
                    raise AssertionError("no decode_error event")


class TestStationApp:
    def test_link_telemetry_relayed_to_clients(self, scenario_doc):
        world = load_scenario_dict(scenario_doc)
        station = StationAgent(world, SocketEndpoint())
        app = create_station_app(station, scenario_doc)
        line = json.dumps({
            "type": "telemetry", "tick": 42, "mode": "standby_hover",
            "mission_state": None,
            "pose": {"position": [1.0, 2.0, 5.0], "velocity": [0, 0, 0],
                     "yaw": 0.0}})
        with TestClient(app) as client:
            with client.websocket_connect("/ws") as ws, \
                    client.websocket_connect("/link") as link:
                link.send_text(line)
                tel = recv_until(ws, "telemetry")
                assert tel["tick"] == 42
                assert tel["pose"]["position"] == [1.0, 2.0, 5.0]
                assert station.tick >= 42

    def test_socket_endpoint_semantics(self):
        ep = SocketEndpoint()
        ep.send("dropped while disconnected")
        assert ep.outbox.qsize() == 0
        ep.connected = True
        ep.send("queued")
        assert ep.outbox.qsize() == 1
        ep.inbox.extend(["a", "b"])
        assert ep.poll(0) == ["a", "b"]
        assert ep.poll(1) == []


def _record(entries):
    return [json.dumps({"tick": t, "dir": d, "msg": m},
                       sort_keys=True, separators=(",", ":"))
            for t, d, m in entries]


class TestReplayApp:
    def test_cadence_and_replay_flag(self):
        lines = _record([
            (0, "s2c", {"type": "telemetry", "tick": 0, "pose": {},
                        "mode": "flying", "mission_state": None}),
            (5, "c2s", {"type": "command", "text": "hidden"}),
            (10, "s2c", {"type": "telemetry", "tick": 10, "pose": {},
                         "mode": "flying", "mission_state": None}),
            (20, "s2c", {"type": "event", "level": "info", "text": "arrived",
                         "replay": False}),
        ])
        app = create_replay_app(lines, speed=2.0)
        with TestClient(app) as client:
            with client.websocket_connect("/ws") as ws:
                stamps, docs = [], []
                for _ in range(3):
                    docs.append(json.loads(ws.receive_text()))
                    stamps.append(time.monotonic())
        assert [d["type"] for d in docs] == ["telemetry", "telemetry", "event"]
        assert docs[2]["replay"] is True
        # gaps of 10 recorded ticks at 2x speed: 0.5 s each, within one tick
        for gap in (stamps[1] - stamps[0], stamps[2] - stamps[1]):
            assert abs(gap * 2.0 / 0.1 - 10) <= 1.0

    def test_malformed_record_names_line(self):
        lines = _record([(0, "s2c", {"type": "abort"})]) + ["{oops"]
        with pytest.raises(ValueError, match="record line 2"):
            create_replay_app(lines)
