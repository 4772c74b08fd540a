"""Small geometry helpers used across world, navigation, and skills."""
from __future__ import annotations

import math

import numpy as np


def normalize_angle(a: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    a = math.fmod(a, 2.0 * math.pi)
    if a <= -math.pi:
        a += 2.0 * math.pi
    elif a > math.pi:
        a -= 2.0 * math.pi
    return a


def yaw_matrix(yaw: float) -> np.ndarray:
    """Rotation body->world for a yaw about +z (0 = +x east, CCW positive)."""
    c, s = math.cos(yaw), math.sin(yaw)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def clamp_norm(v: np.ndarray, max_norm: float) -> np.ndarray:
    """Scale v down so that |v| <= max_norm; zero-safe."""
    n = float(np.linalg.norm(v))
    if n > max_norm > 0.0:
        return v * (max_norm / n)
    return v
