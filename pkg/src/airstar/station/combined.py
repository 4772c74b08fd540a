"""Combined-in-process mode: onboard + station share one deterministic loop.

The tier link is an in-memory channel with optional injected latency; the
client side records every wire message so runs can be replayed bit-for-bit.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Callable, Optional

from ..config import AirstarConfig
from ..world.scenario import load_scenario, load_scenario_dict
from ..world.types import World
from .link import InMemoryLink
from .mission import MissionState
from .onboard import OnboardAgent
from .protocol import Command, encode
from .station import StationAgent, build_knowledge_base


class RecordingClient:
    """Client endpoint that captures the station->client stream."""

    def __init__(self, runner: "CombinedRunner"):
        self.runner = runner
        self.received: list[tuple[int, str]] = []

    def send(self, line: str) -> None:
        self.received.append((self.runner.tick, line))
        self.runner._record("s2c", line)


class CombinedRunner:
    def __init__(self, scenario: str | Path | dict | World,
                 config: Optional[AirstarConfig] = None,
                 seed: Optional[int] = None,
                 record_path: Optional[str | Path] = None,
                 journal_path: Optional[str | Path] = None):
        self.cfg = config or AirstarConfig()
        if isinstance(scenario, World):
            self.world = scenario
        elif isinstance(scenario, dict):
            self.world = load_scenario_dict(scenario)
        else:
            self.world = load_scenario(scenario)
        if seed is not None:
            self.world.seed = seed
            import numpy as np
            self.world.rng = np.random.default_rng(seed)

        self.link = InMemoryLink(self.cfg.latency_mean_ticks,
                                 self.cfg.latency_jitter_ticks,
                                 seed=self.world.seed)
        self.onboard = OnboardAgent(self.world, self.link.endpoint_a(), self.cfg)
        kb = build_knowledge_base(self.world, journal_path=journal_path)
        self.station = StationAgent(self.world, self.link.endpoint_b(), self.cfg, kb=kb)
        self.client = RecordingClient(self)
        self.station.add_client(self.client)

        self.tick = 0
        self.mission_failed = False
        self._record_lines: list[str] = []
        self.record_path = Path(record_path) if record_path else None

    def _record(self, direction: str, line: str) -> None:
        try:
            msg = json.loads(line)
        except json.JSONDecodeError:
            return   # malformed client input is rejected downstream, not recorded
        self._record_lines.append(json.dumps(
            {"tick": self.tick, "dir": direction, "msg": msg},
            sort_keys=True, separators=(",", ":")))

    def client_send(self, line: str) -> None:
        self._record("c2s", line)
        self.station.handle_client_line(line)

    def step_tick(self) -> None:
        self.tick += 1
        self.link.set_tick(self.tick)
        self.onboard.tick()
        self.station.set_tick(self.tick)
        self.station.poll()
        if self.station.fsm.state == MissionState.mission_failed:
            self.mission_failed = True

    def run_until(self, predicate: Callable[[], bool], max_ticks: int = 20000) -> bool:
        for _ in range(max_ticks):
            if predicate():
                return True
            self.step_tick()
        return predicate()

    def wait_for_standby(self, max_ticks: int = 20000) -> bool:
        return self.run_until(
            lambda: self.station.fsm.state == MissionState.standby_hover, max_ticks)

    def run_mission(self, text: str, max_ticks: int = 20000) -> bool:
        """Send one command from standby and wait for it to resolve.

        Returns True when the mission ends back in standby hover without
        passing through mission_failed.
        """
        if not self.wait_for_standby():
            return False
        self.client_send(encode(Command(text=text)))
        failed_before = self.mission_failed
        left = self.run_until(
            lambda: self.station.fsm.state != MissionState.standby_hover,
            max_ticks=100)
        if not left:
            return False   # command rejected or no-op
        done = self.run_until(
            lambda: self.station.fsm.state in (MissionState.standby_hover,
                                               MissionState.mission_failed),
            max_ticks=max_ticks)
        failed = self.mission_failed and not failed_before
        if self.station.fsm.state == MissionState.mission_failed:
            # clear for subsequent missions, mirroring an operator ack
            from .protocol import Ack
            self.client_send(encode(Ack()))
        # one settling tick so clients see telemetry for the resolved state
        self.step_tick()
        return done and not failed

    def save_record(self) -> None:
        if self.record_path:
            self.record_path.write_text("\n".join(self._record_lines) + "\n")

    @property
    def record_lines(self) -> list[str]:
        return list(self._record_lines)
