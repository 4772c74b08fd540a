"""Domain types for the simulated campus world."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from ..camera import CameraModel


@dataclass(frozen=True)
class GeoPoint:
    lat: float
    lon: float
    alt: float = 0.0

    def __post_init__(self):
        if not (-90.0 <= self.lat <= 90.0):
            raise ValueError(f"latitude out of range: {self.lat}")
        if not (-180.0 <= self.lon <= 180.0):
            raise ValueError(f"longitude out of range: {self.lon}")
        if not math.isfinite(self.alt):
            raise ValueError("altitude must be finite")


@dataclass
class LandmarkNode:
    id: str
    name: str
    gps: GeoPoint
    orientation_tag: str = ""
    description: str = ""
    aliases: list[str] = field(default_factory=list)

    def __post_init__(self):
        if not self.name:
            raise ValueError("landmark name must be nonempty")


class GridKind(str, Enum):
    uav_exploration = "uav_exploration"
    pedestrian_guidance = "pedestrian_guidance"


@dataclass
class OccupancyGrid:
    kind: GridKind
    origin: np.ndarray          # ENU meters of the (row 0, col 0) cell corner
    resolution: float           # meters per cell
    width: int                  # columns (x / east)
    height: int                 # rows (y / north)
    cells: np.ndarray           # bool, shape (height, width), True = blocked

    def __post_init__(self):
        self.origin = np.asarray(self.origin, dtype=float)
        self.cells = np.asarray(self.cells, dtype=bool).reshape(self.height, self.width)
        if self.resolution <= 0:
            raise ValueError("resolution must be positive")

    def in_bounds(self, row: int, col: int) -> bool:
        return 0 <= row < self.height and 0 <= col < self.width

    def occupied(self, row: int, col: int) -> bool:
        return bool(self.cells[row, col])

    def point_to_cell(self, x: float, y: float) -> tuple[int, int]:
        col = int(math.floor((x - self.origin[0]) / self.resolution))
        row = int(math.floor((y - self.origin[1]) / self.resolution))
        return row, col

    def cell_center(self, row: int, col: int) -> tuple[float, float]:
        x = self.origin[0] + (col + 0.5) * self.resolution
        y = self.origin[1] + (row + 0.5) * self.resolution
        return x, y

    def contains_point(self, x: float, y: float) -> bool:
        row, col = self.point_to_cell(x, y)
        return self.in_bounds(row, col)


class UavMode(str, Enum):
    grounded = "grounded"
    ascending = "ascending"
    standby_hover = "standby_hover"
    executing = "executing"
    returning = "returning"


@dataclass
class UavState:
    position: np.ndarray
    velocity: np.ndarray
    yaw: float = 0.0
    mode: UavMode = UavMode.grounded

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=float)
        self.velocity = np.asarray(self.velocity, dtype=float)

    def copy(self) -> "UavState":
        return UavState(self.position.copy(), self.velocity.copy(), self.yaw, self.mode)

    def to_dict(self) -> dict:
        return {
            "position": [float(v) for v in self.position],
            "velocity": [float(v) for v in self.velocity],
            "yaw": float(self.yaw),
            "mode": self.mode.value,
        }


@dataclass
class Pedestrian:
    id: str
    position: np.ndarray
    path: list[np.ndarray] = field(default_factory=list)
    speed: float = 1.2
    is_user: bool = False
    _progress: float = 0.0      # meters travelled along the looped path

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=float)
        self.path = [np.asarray(p, dtype=float) for p in self.path]
        if self.speed > 2.0:
            raise ValueError(f"pedestrian speed {self.speed} exceeds 2.0 m/s")


@dataclass
class SceneObject:
    """Axis-aligned box the renderer and raycaster can see."""
    id: str
    class_tag: str
    center: np.ndarray
    size: np.ndarray
    landmark_tags: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.center = np.asarray(self.center, dtype=float)
        self.size = np.asarray(self.size, dtype=float)

    @property
    def box_min(self) -> np.ndarray:
        return self.center - self.size / 2.0

    @property
    def box_max(self) -> np.ndarray:
        return self.center + self.size / 2.0


@dataclass
class FrameObject:
    object_id: str
    class_tag: str
    landmark_tags: list[str]
    pixel_bbox: tuple[float, float, float, float]   # (u_min, v_min, u_max, v_max)
    centroid_depth: float
    centroid_pixel: tuple[float, float]


@dataclass
class ViewFrame:
    depth: Optional[np.ndarray]         # (height, width) z-depth meters, inf = sky
    objects: list[FrameObject]
    pose_at_capture: UavState
    camera: CameraModel


@dataclass
class Limits:
    v_max: float = 5.0
    a_max: float = 3.0
    yaw_rate_max: float = 1.5

    @classmethod
    def from_dict(cls, d: dict) -> "Limits":
        return cls(v_max=float(d.get("v_max", 5.0)),
                   a_max=float(d.get("a_max", 3.0)),
                   yaw_rate_max=float(d.get("yaw_rate_max", 1.5)))


@dataclass
class World:
    reference_gps: GeoPoint
    grids: dict[GridKind, OccupancyGrid]
    landmarks: list[LandmarkNode]
    pedestrians: list[Pedestrian]
    objects: list[SceneObject]
    uav: UavState
    camera: CameraModel
    limits: Limits
    seed: int
    tick: int = 0
    z_cruise: float = 5.0
    obstacle_height: float = 10.0
    rng: np.random.Generator = None

    def __post_init__(self):
        if self.rng is None:
            self.rng = np.random.default_rng(self.seed)

    @property
    def time(self) -> float:
        return self.tick * 0.1

    @property
    def uav_grid(self) -> OccupancyGrid:
        return self.grids[GridKind.uav_exploration]

    def grid(self, kind: GridKind) -> Optional[OccupancyGrid]:
        return self.grids.get(kind)

    def user(self) -> Pedestrian:
        return next(p for p in self.pedestrians if p.is_user)

    def scene_objects(self) -> list[SceneObject]:
        """Static objects plus pedestrians boxed as people."""
        out = list(self.objects)
        for ped in self.pedestrians:
            tags = ["user"] if ped.is_user else []
            center = ped.position + np.array([0.0, 0.0, 0.85])
            out.append(SceneObject(id=ped.id, class_tag="person", center=center,
                                   size=np.array([0.5, 0.5, 1.7]), landmark_tags=tags))
        return out

    def snapshot_state(self) -> dict:
        """Deterministic serializable state used for telemetry and records."""
        return {
            "tick": self.tick,
            "uav": self.uav.to_dict(),
            "pedestrians": [
                {"id": p.id, "position": [round(float(v), 9) for v in p.position],
                 "is_user": p.is_user}
                for p in self.pedestrians
            ],
        }
