"""Pinhole camera model: projection and back-projection.

Camera frame convention: x right, y down, z forward (z-depth along the
forward axis). The extrinsic is a rigid transform body->camera; the body
frame is x forward, y left, z up, rotated about world +z by the UAV yaw.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import yaw_matrix

# body (x fwd, y left, z up) -> camera (x right, y down, z fwd), no tilt
DEFAULT_BODY_TO_CAM = np.array([
    [0.0, -1.0, 0.0],
    [0.0, 0.0, -1.0],
    [1.0, 0.0, 0.0],
])


def body_to_cam(pitch_deg: float = 0.0) -> np.ndarray:
    """Body->camera rotation for a camera pitched down by pitch_deg."""
    phi = math.radians(pitch_deg)
    # rows are the camera axes (right, down, forward) in body coordinates
    return np.array([
        [0.0, -1.0, 0.0],
        [-math.sin(phi), 0.0, -math.cos(phi)],
        [math.cos(phi), 0.0, -math.sin(phi)],
    ])


@dataclass
class CameraModel:
    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int
    extrinsic_r: np.ndarray = field(default_factory=lambda: DEFAULT_BODY_TO_CAM.copy())
    extrinsic_t: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        self.extrinsic_r = np.asarray(self.extrinsic_r, dtype=float)
        self.extrinsic_t = np.asarray(self.extrinsic_t, dtype=float)
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal lengths must be positive")
        if self.width <= 0 or self.height <= 0:
            raise ValueError("image dimensions must be positive")
        rtr = self.extrinsic_r.T @ self.extrinsic_r
        if not np.allclose(rtr, np.eye(3), atol=1e-9):
            raise ValueError("extrinsic rotation is not orthonormal")
        if not math.isclose(float(np.linalg.det(self.extrinsic_r)), 1.0, abs_tol=1e-9):
            raise ValueError("extrinsic rotation must have det +1")

    @classmethod
    def from_dict(cls, d: dict) -> "CameraModel":
        if "extrinsic_r" in d:
            r = np.asarray(d["extrinsic_r"], dtype=float)
        else:
            r = body_to_cam(pitch_deg=float(d.get("pitch_deg", 0.0)))
        t = np.asarray(d.get("extrinsic_t", [0.0, 0.0, 0.0]), dtype=float)
        return cls(fx=float(d["fx"]), fy=float(d["fy"]), cx=float(d["cx"]),
                   cy=float(d["cy"]), width=int(d["width"]), height=int(d["height"]),
                   extrinsic_r=r, extrinsic_t=t)

    def to_dict(self) -> dict:
        return {
            "fx": self.fx, "fy": self.fy, "cx": self.cx, "cy": self.cy,
            "width": self.width, "height": self.height,
            "extrinsic_r": self.extrinsic_r.tolist(),
            "extrinsic_t": self.extrinsic_t.tolist(),
        }


def world_to_camera(point: np.ndarray, camera: CameraModel,
                    uav_position: np.ndarray, uav_yaw: float) -> np.ndarray:
    """Transform a world ENU point into the camera frame."""
    body = yaw_matrix(uav_yaw).T @ (np.asarray(point, dtype=float) - np.asarray(uav_position, dtype=float))
    return camera.extrinsic_r @ body + camera.extrinsic_t


def camera_to_world(point_cam: np.ndarray, camera: CameraModel,
                    uav_position: np.ndarray, uav_yaw: float) -> np.ndarray:
    """Inverse of world_to_camera."""
    body = camera.extrinsic_r.T @ (np.asarray(point_cam, dtype=float) - camera.extrinsic_t)
    return yaw_matrix(uav_yaw) @ body + np.asarray(uav_position, dtype=float)


def project(point: np.ndarray, camera: CameraModel,
            uav_position: np.ndarray, uav_yaw: float):
    """Project a world point to (u, v, z_depth). Returns None when behind the camera."""
    pc = world_to_camera(point, camera, uav_position, uav_yaw)
    if pc[2] <= 0.0:
        return None
    u = camera.fx * pc[0] / pc[2] + camera.cx
    v = camera.fy * pc[1] / pc[2] + camera.cy
    return float(u), float(v), float(pc[2])


def back_project(u: float, v: float, depth: float, camera: CameraModel,
                 uav_position: np.ndarray, uav_yaw: float) -> np.ndarray:
    """Recover the world point at pixel (u, v) with z-depth `depth`."""
    pc = np.array([(u - camera.cx) / camera.fx * depth,
                   (v - camera.cy) / camera.fy * depth,
                   depth])
    return camera_to_world(pc, camera, uav_position, uav_yaw)
