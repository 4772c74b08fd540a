"""Short-range navigation: language grounding to a pixel, then depth
back-projection to a world goal."""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Protocol

import numpy as np

from .camera import CameraModel, back_project
from .errors import BackendUnavailable, InvalidDepth, NoTarget
from .geonav import tokenize
from .world.types import UavState, ViewFrame

STOPWORDS = {
    "a", "an", "the", "to", "of", "in", "on", "at", "me", "my", "please",
    "fly", "go", "move", "and", "is", "it", "this", "that", "ahead",
    "behind", "above", "near", "front",
}

DEFAULT_STANDOFF = 2.0
DEFAULT_Z_MIN = 1.0


class TargetSource(str, Enum):
    grounding_backend = "grounding_backend"
    user_click = "user_click"


@dataclass
class PixelTarget:
    u: float
    v: float
    confidence: float = 1.0
    source: TargetSource = TargetSource.grounding_backend


def instruction_nouns(instruction: str) -> list[str]:
    return [t for t in tokenize(instruction) if t not in STOPWORDS]


def _bbox_area(bbox) -> float:
    return max(0.0, bbox[2] - bbox[0]) * max(0.0, bbox[3] - bbox[1])


class GroundingBackend(Protocol):
    def ground(self, instruction: str, frame: ViewFrame) -> PixelTarget: ...


class MockGroundingBackend:
    """Deterministic grounding: token overlap of instruction nouns against
    each object's class/landmark tags; ties go to the largest bbox, then the
    smallest object id. Returns the bbox center."""

    def ground(self, instruction: str, frame: ViewFrame) -> PixelTarget:
        nouns = set(instruction_nouns(instruction))
        best = None
        best_key = None
        for obj in frame.objects:
            tags = set(tokenize(obj.class_tag))
            for t in obj.landmark_tags:
                tags |= set(tokenize(t))
            overlap = len(nouns & tags)
            if overlap == 0:
                continue
            key = (-overlap, -_bbox_area(obj.pixel_bbox), obj.object_id)
            if best_key is None or key < best_key:
                best, best_key = obj, key
        if best is None:
            raise NoTarget(f"nothing in view matches '{instruction}'")
        u = (best.pixel_bbox[0] + best.pixel_bbox[2]) / 2.0
        v = (best.pixel_bbox[1] + best.pixel_bbox[3]) / 2.0
        conf = min(1.0, -best_key[0] / max(1, len(nouns)))
        return PixelTarget(u=u, v=v, confidence=conf)


class RemoteGroundingBackend:
    """HTTP grounding slot: ships annotations, not images."""

    def __init__(self, url: str, timeout: float = 10.0):
        self.url = url
        self.timeout = timeout

    def ground(self, instruction: str, frame: ViewFrame) -> PixelTarget:
        import httpx
        payload = {
            "instruction": instruction,
            "objects": [
                {"id": o.object_id,
                 "tags": [o.class_tag] + list(o.landmark_tags),
                 "bbox": list(o.pixel_bbox),
                 "depth": o.centroid_depth}
                for o in frame.objects
            ],
        }
        try:
            resp = httpx.post(self.url, json=payload, timeout=self.timeout)
            resp.raise_for_status()
        except httpx.HTTPError as e:
            raise BackendUnavailable(f"grounding backend: {e}") from e
        doc = resp.json()
        if doc.get("none"):
            raise NoTarget("remote grounding returned no target")
        return PixelTarget(u=float(doc["u"]), v=float(doc["v"]),
                           confidence=float(doc.get("confidence", 1.0)))


def ground_target(instruction: str, frame: ViewFrame,
                  backend: GroundingBackend | None = None) -> PixelTarget:
    if not frame.objects and frame.depth is None:
        raise NoTarget("empty frame")
    backend = backend or MockGroundingBackend()
    target = backend.ground(instruction, frame)
    if not (0 <= target.u < frame.camera.width and 0 <= target.v < frame.camera.height):
        raise NoTarget(f"backend pixel ({target.u},{target.v}) out of image bounds")
    return target


def pixel_to_world(target: PixelTarget, depth: float, camera: CameraModel,
                   uav: UavState) -> np.ndarray:
    """Back-project a pixel with z-depth to a world ENU point."""
    if not math.isfinite(depth) or depth <= 0.0:
        raise InvalidDepth(f"depth {depth} is not a positive finite value")
    return back_project(target.u, target.v, depth, camera, uav.position, uav.yaw)


def median_depth(frame: ViewFrame, u: float, v: float) -> float:
    """Median of the finite depths in the 3x3 pixel neighborhood."""
    if frame.depth is None:
        raise InvalidDepth("frame carries no depth raster")
    h, w = frame.depth.shape
    ui, vi = int(u), int(v)
    vals = []
    for dv in (-1, 0, 1):
        for du in (-1, 0, 1):
            uu, vv = ui + du, vi + dv
            if 0 <= uu < w and 0 <= vv < h:
                d = float(frame.depth[vv, uu])
                if math.isfinite(d) and d > 0:
                    vals.append(d)
    if not vals:
        raise InvalidDepth(f"no finite depth around pixel ({u:.1f},{v:.1f})")
    vals.sort()
    n = len(vals)
    return vals[n // 2] if n % 2 else 0.5 * (vals[n // 2 - 1] + vals[n // 2])


def object_nav_goal(instruction: str, frame: ViewFrame, camera: CameraModel,
                    uav: UavState, standoff: float = DEFAULT_STANDOFF,
                    backend: GroundingBackend | None = None,
                    z_min: float = DEFAULT_Z_MIN) -> np.ndarray:
    """Goal point for 'fly ahead of / behind / above the X' style instructions."""
    if standoff < 0:
        raise ValueError("standoff must be >= 0")
    target = ground_target(instruction, frame, backend)
    depth = median_depth(frame, target.u, target.v)
    point = pixel_to_world(target, depth, camera, uav)

    text = instruction.lower()
    goal = point.copy()
    if "above" in text:
        goal[2] += standoff
    else:
        to_target = point - uav.position
        to_target[2] = 0.0
        dist = float(np.linalg.norm(to_target))
        if dist > 1e-9:
            direction = to_target / dist
            if "behind" in text:
                goal = point + standoff * direction
            else:
                # pull back toward the UAV, never past it
                goal = point - min(standoff, dist) * direction
            goal[2] = point[2]
    goal[2] = max(goal[2], z_min)
    return goal
