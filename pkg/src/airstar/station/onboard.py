"""Onboard tier: the 10 Hz tick loop.

Runs only lightweight work locally (setpoint following, tracking, gesture
clamping, avoidance raycasts); never blocks on the station. Stale setpoints
are reused, and link loss zeroes the velocity within one tick.
"""
from __future__ import annotations

import math
from typing import Optional

import numpy as np

from ..config import AirstarConfig
from ..errors import DecodeError, NoTarget, TargetLost
from ..geometry import clamp_norm
from ..skills import TrackState, gesture_offset, track_init, track_step
from ..world.render import render_view
from ..world.sim import ControlInput, TICK_DT, step
from ..world.types import UavMode, World
from .link import LinkEndpoint
from .protocol import Event, FrameMeta, Setpoint, Telemetry, decode, encode


def _round3(values) -> list[float]:
    return [round(float(v), 3) for v in values]


class OnboardAgent:
    def __init__(self, world: World, link: LinkEndpoint,
                 config: Optional[AirstarConfig] = None):
        self.world = world
        self.link = link
        self.cfg = config or AirstarConfig()
        self.directive = Setpoint(kind="idle")
        self.track_state: Optional[TrackState] = None
        self._goto_target: Optional[np.ndarray] = None
        self._was_connected = True

    # -- link handling -----------------------------------------------------

    def _ingest(self) -> None:
        if not self.link.connected:
            if self._was_connected:
                # hold position until the station comes back
                self.directive = Setpoint(kind="hover", data={})
                self._goto_target = None
                self._was_connected = False
            return
        self._was_connected = True
        for line in self.link.poll(self.world.tick):
            try:
                msg = decode(line)
            except DecodeError:
                continue
            if isinstance(msg, Setpoint):
                self._apply_setpoint(msg)

    def _apply_setpoint(self, msg: Setpoint) -> None:
        self.directive = msg
        self._goto_target = None
        if msg.kind != "track":
            self.track_state = None
        mode = msg.data.get("mode")
        if mode:
            self.world.uav.mode = UavMode(mode)
        if msg.kind == "gesture":
            # clamp against obstacles once, then hold the nudged position
            delta = gesture_offset(self.world, self.world.uav,
                                   msg.data["dir"], float(msg.data.get("step", 0.5)))
            self._goto_target = self.world.uav.position + delta
            self.directive = Setpoint(kind="goto_internal")
        elif msg.kind == "track" and msg.data.get("retarget"):
            self.track_state = None

    # -- control -----------------------------------------------------------

    def _goto_control(self, target: np.ndarray, yaw: Optional[float]) -> ControlInput:
        err = target - self.world.uav.position
        vel = clamp_norm(err * self.cfg.goto_gain, self.world.limits.v_max)
        return ControlInput(velocity_setpoint=vel, yaw_setpoint=yaw)

    def _trajectory_control(self, data: dict) -> ControlInput:
        points = data["points"]
        start = int(data["start_tick"])
        idx = min(max(self.world.tick - start, 0), len(points) - 1)
        target = np.asarray(points[idx], dtype=float)
        ff = np.zeros(3)
        if idx + 1 < len(points):
            ff = (np.asarray(points[idx + 1]) - target) / TICK_DT
        err = target - self.world.uav.position
        vel = clamp_norm(ff + err * self.cfg.goto_gain, self.world.limits.v_max)
        yaw = None
        horiz = np.linalg.norm(vel[:2])
        if horiz > 0.2:
            yaw = math.atan2(vel[1], vel[0])
        return ControlInput(velocity_setpoint=vel, yaw_setpoint=yaw)

    def _track_control(self, data: dict) -> ControlInput:
        frame = render_view(self.world, with_depth=False)
        if self.track_state is None:
            init = data.get("query")
            if init is None and "u" in data:
                init = (data["u"], data["v"])
            try:
                self.track_state = track_init(
                    frame, init, standoff=float(data.get("standoff", self.cfg.track_standoff)))
                self.link.send(encode(Event(level="info",
                                            text=f"track_started:{self.track_state.target_id}")))
            except NoTarget:
                self.link.send(encode(Event(level="error", text="track_no_target")))
                self.directive = Setpoint(kind="hover", data={})
                return ControlInput.hover()
        try:
            self.track_state, cmd = track_step(
                self.track_state, frame, self.world.uav, self.world,
                k_yaw=self.cfg.k_yaw, k_pos=self.cfg.k_pos,
                lost_threshold=self.cfg.lost_threshold)
        except TargetLost:
            self.link.send(encode(Event(level="error", text="track_lost")))
            self.track_state = None
            self.directive = Setpoint(kind="hover", data={})
            return ControlInput.hover()
        if cmd.reposition_goal is not None:
            return self._goto_control(cmd.reposition_goal, None)
        return ControlInput(velocity_setpoint=cmd.velocity_setpoint, yaw_rate=cmd.yaw_rate)

    def _control(self) -> ControlInput:
        if not self.link.connected:
            return ControlInput(hard_stop=True)
        d = self.directive
        if d.kind == "idle":
            return ControlInput(accel=np.zeros(3))
        if d.kind == "hover":
            return ControlInput.hover()
        if d.kind == "goto":
            yaw = d.data.get("yaw")
            return self._goto_control(np.asarray(d.data["point"], dtype=float),
                                      float(yaw) if yaw is not None else None)
        if d.kind == "goto_internal" and self._goto_target is not None:
            return self._goto_control(self._goto_target, None)
        if d.kind == "trajectory":
            return self._trajectory_control(d.data)
        if d.kind == "track":
            return self._track_control(d.data)
        return ControlInput.hover()

    # -- main loop ---------------------------------------------------------

    def tick(self) -> None:
        """One 10 Hz cycle: ingest, control, step, publish."""
        self._ingest()
        control = self._control()
        step(self.world, control, TICK_DT)
        self._publish()

    def _publish(self) -> None:
        if not self.link.connected:
            return
        uav = self.world.uav
        pose = {
            "position": _round3(uav.position),
            "velocity": _round3(uav.velocity),
            "yaw": round(float(uav.yaw), 4),
        }
        self.link.send(encode(Telemetry(tick=self.world.tick, pose=pose,
                                        mode=uav.mode.value)))
        frame = render_view(self.world, with_depth=False)
        objects = [
            {"id": o.object_id, "class_tag": o.class_tag,
             "landmark_tags": list(o.landmark_tags),
             "bbox": [round(b, 1) for b in o.pixel_bbox],
             "depth": round(o.centroid_depth, 2)}
            for o in frame.objects
        ]
        self.link.send(encode(FrameMeta(
            tick=self.world.tick, objects=objects,
            camera={"fx": frame.camera.fx, "fy": frame.camera.fy,
                    "cx": frame.camera.cx, "cy": frame.camera.cy,
                    "width": frame.camera.width, "height": frame.camera.height},
            pose_at_capture=pose)))
