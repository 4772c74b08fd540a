"""Deterministic world stepping: UAV kinematics and pedestrian motion."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..geometry import clamp_norm, normalize_angle
from .types import Pedestrian, World

TICK_DT = 0.1


@dataclass
class ControlInput:
    """One tick of control: either an acceleration or a velocity setpoint."""
    velocity_setpoint: Optional[np.ndarray] = None
    accel: Optional[np.ndarray] = None
    yaw_rate: float = 0.0
    yaw_setpoint: Optional[float] = None
    hard_stop: bool = False     # emergency brake, exempt from the accel clamp

    def __post_init__(self):
        if self.velocity_setpoint is not None:
            self.velocity_setpoint = np.asarray(self.velocity_setpoint, dtype=float)
        if self.accel is not None:
            self.accel = np.asarray(self.accel, dtype=float)

    @classmethod
    def hover(cls) -> "ControlInput":
        return cls(velocity_setpoint=np.zeros(3))


def _advance_pedestrian(ped: Pedestrian, dt: float) -> None:
    if len(ped.path) < 2 or ped.speed <= 0:
        return
    pts = ped.path + [ped.path[0]]  # closed loop
    seg_lens = [float(np.linalg.norm(pts[i + 1] - pts[i])) for i in range(len(pts) - 1)]
    total = sum(seg_lens)
    if total <= 0:
        return
    ped._progress = (ped._progress + ped.speed * dt) % total
    s = ped._progress
    for i, L in enumerate(seg_lens):
        if s <= L or i == len(seg_lens) - 1:
            frac = s / L if L > 0 else 0.0
            ped.position = pts[i] + frac * (pts[i + 1] - pts[i])
            return
        s -= L


def step(world: World, control: ControlInput, dt: float = TICK_DT) -> World:
    """Advance the world by dt; clamps rather than rejects infeasible control."""
    if not (0.0 < dt <= 0.5):
        raise ValueError(f"dt must be in (0, 0.5], got {dt}")
    uav = world.uav
    limits = world.limits

    if control.hard_stop:
        uav.velocity = np.zeros(3)
        accel = np.zeros(3)
    elif control.velocity_setpoint is not None:
        accel = (control.velocity_setpoint - uav.velocity) / dt
    elif control.accel is not None:
        accel = control.accel
    else:
        accel = np.zeros(3)
    accel = clamp_norm(accel, limits.a_max)
    uav.velocity = clamp_norm(uav.velocity + accel * dt, limits.v_max)
    uav.position = uav.position + uav.velocity * dt
    if uav.position[2] < 0.0:
        uav.position[2] = 0.0
        if uav.velocity[2] < 0.0:
            uav.velocity[2] = 0.0

    if control.yaw_setpoint is not None:
        err = normalize_angle(control.yaw_setpoint - uav.yaw)
        max_step = limits.yaw_rate_max * dt
        uav.yaw = normalize_angle(uav.yaw + max(-max_step, min(max_step, err)))
    else:
        uav.yaw = normalize_angle(uav.yaw + control.yaw_rate * dt)

    for ped in world.pedestrians:
        _advance_pedestrian(ped, dt)

    world.tick += 1
    return world
