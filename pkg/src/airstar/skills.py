"""Skill library: human framing, gesture nudges, tracking, viewpoint scan & QA."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .camera import CameraModel
from .errors import (DegenerateGeometry, NoHumanVisible, NoInformativeView,
                     NoTarget, TargetLost)
from .geometry import clamp_norm, normalize_angle
from .geonav import gps_to_local, tokenize
from .objectnav import instruction_nouns
from .world.raycast import raycast
from .world.render import render_view
from .world.types import (GeoPoint, LandmarkNode, UavState, ViewFrame, World)

# control constants are config-overridable defaults
K_YAW = 1.0                # 1/s
K_POS = 0.8                # 1/s
LOST_THRESHOLD = 20        # ticks
DETECTION_RANGE = 30.0     # m
FRAMING_RANGE = (3.0, 8.0)  # m
GESTURE_CLEARANCE = 0.5    # m
SCAN_STEP_DEG = 10.0
SCAN_HALF_SPAN = 3          # candidates at k in [-3, 3]
CENTER_TOLERANCE_PX = 5.0


@dataclass
class FramingAdjustment:
    yaw: float
    position: np.ndarray

    def is_zero(self, uav: UavState, tol_yaw: float = 1e-6, tol_pos: float = 1e-6) -> bool:
        return (abs(normalize_angle(self.yaw - uav.yaw)) < tol_yaw
                and float(np.linalg.norm(self.position - uav.position)) < tol_pos)


def frame_human(world: World, uav: UavState, camera: CameraModel) -> FramingAdjustment:
    """Face the nearest pedestrian and settle into the framing range."""
    candidates = []
    for ped in world.pedestrians:
        delta = ped.position - uav.position
        dist = float(np.linalg.norm(delta[:2]))
        if dist <= DETECTION_RANGE:
            candidates.append((dist, ped))
    if not candidates:
        raise NoHumanVisible(f"no pedestrian within {DETECTION_RANGE} m")
    dist, ped = min(candidates, key=lambda c: (c[0], c[1].id))
    if dist < 1e-9:
        raise DegenerateGeometry("pedestrian directly under the UAV")
    delta = ped.position - uav.position
    yaw = math.atan2(delta[1], delta[0])
    lo, hi = FRAMING_RANGE
    target_dist = min(max(dist, lo), hi)
    direction = delta[:2] / dist
    new_xy = ped.position[:2] - direction * target_dist
    position = np.array([new_xy[0], new_xy[1], uav.position[2]])
    return FramingAdjustment(yaw=yaw, position=position)


GESTURE_DIRECTIONS = ("up", "down", "left", "right", "forward", "backward")


def gesture_offset(world: World, uav: UavState, direction: str, step: float) -> np.ndarray:
    """World-frame position delta for a gesture nudge, clamped to keep
    at least GESTURE_CLEARANCE meters of raycast clearance."""
    if direction not in GESTURE_DIRECTIONS:
        raise ValueError(f"unknown gesture direction '{direction}'")
    if not (0.0 < step <= 2.0):
        raise ValueError(f"gesture step must be in (0, 2], got {step}")
    fwd = np.array([math.cos(uav.yaw), math.sin(uav.yaw), 0.0])
    left = np.array([-math.sin(uav.yaw), math.cos(uav.yaw), 0.0])
    up = np.array([0.0, 0.0, 1.0])
    unit = {"up": up, "down": -up, "forward": fwd, "backward": -fwd,
            "left": left, "right": -left}[direction]
    hit = raycast(world, uav.position, unit, step + GESTURE_CLEARANCE)
    mag = step
    if hit is not None:
        mag = max(0.0, min(step, hit - GESTURE_CLEARANCE))
    return unit * mag


# ---------------------------------------------------------------------------
# Tracking
# ---------------------------------------------------------------------------

@dataclass
class TrackState:
    target_id: str
    last_bbox: tuple[float, float, float, float]
    lost_frames: int = 0
    standoff: float = 5.0
    last_world_position: Optional[np.ndarray] = None


@dataclass
class TrackCommand:
    velocity_setpoint: np.ndarray = field(default_factory=lambda: np.zeros(3))
    yaw_rate: float = 0.0
    reposition_goal: Optional[np.ndarray] = None


def track_init(frame: ViewFrame, init, standoff: float = 5.0) -> TrackState:
    """Start tracking from an instruction or a click pixel."""
    if not frame.objects:
        raise NoTarget("nothing visible to track")
    if isinstance(init, str):
        nouns = set(instruction_nouns(init))
        best, best_key = None, None
        for obj in frame.objects:
            tags = set(tokenize(obj.class_tag))
            for t in obj.landmark_tags:
                tags |= set(tokenize(t))
            overlap = len(nouns & tags)
            if overlap == 0:
                continue
            area = _area(obj.pixel_bbox)
            key = (-overlap, -area, obj.object_id)
            if best_key is None or key < best_key:
                best, best_key = obj, key
        if best is None:
            raise NoTarget(f"no object matches '{init}'")
    else:
        u, v = float(init[0]), float(init[1])
        hits = [o for o in frame.objects
                if o.pixel_bbox[0] <= u <= o.pixel_bbox[2]
                and o.pixel_bbox[1] <= v <= o.pixel_bbox[3]]
        if not hits:
            raise NoTarget(f"click ({u:.0f},{v:.0f}) hit no object")
        best = min(hits, key=lambda o: (_area(o.pixel_bbox), o.object_id))
    return TrackState(target_id=best.object_id, last_bbox=best.pixel_bbox,
                      standoff=standoff)


def _area(bbox) -> float:
    return max(0.0, bbox[2] - bbox[0]) * max(0.0, bbox[3] - bbox[1])


def track_step(state: TrackState, frame: ViewFrame, uav: UavState, world: World,
               k_yaw: float = K_YAW, k_pos: float = K_POS,
               lost_threshold: int = LOST_THRESHOLD) -> tuple[TrackState, TrackCommand]:
    """One tick of the keep-target-centered controller with occlusion handling."""
    camera = frame.camera
    target = next((o for o in frame.objects if o.object_id == state.target_id), None)
    if target is not None:
        state.lost_frames = 0
        state.last_bbox = target.pixel_bbox
        u = target.centroid_pixel[0]
        # u > cx means the target sits right of center; with CCW-positive yaw
        # the corrective turn is clockwise, hence the negative sign
        yaw_rate = -k_yaw * (u - camera.cx) / camera.fx

        from .camera import back_project
        world_pos = back_project(target.centroid_pixel[0], target.centroid_pixel[1],
                                 target.centroid_depth, camera, uav.position, uav.yaw)
        state.last_world_position = world_pos
        to_target = world_pos - uav.position
        to_target[2] = 0.0
        dist = float(np.linalg.norm(to_target))
        vel = np.zeros(3)
        if dist > 1e-9:
            vel = to_target / dist * (k_pos * (dist - state.standoff))
        vel = clamp_norm(vel, world.limits.v_max)
        yaw_rate = max(-world.limits.yaw_rate_max, min(world.limits.yaw_rate_max, yaw_rate))
        return state, TrackCommand(velocity_setpoint=vel, yaw_rate=yaw_rate)

    state.lost_frames += 1
    if state.lost_frames > lost_threshold:
        raise TargetLost(f"target '{state.target_id}' unseen for {state.lost_frames} ticks")
    cmd = TrackCommand(velocity_setpoint=np.zeros(3))
    if state.last_world_position is not None:
        goal = _reposition_goal(world, uav, state.last_world_position, state.standoff)
        if goal is not None:
            cmd.reposition_goal = goal
    return state, cmd


def _reposition_goal(world: World, uav: UavState, target: np.ndarray,
                     standoff: float) -> Optional[np.ndarray]:
    """First of 8 candidate viewpoints around the target with a clear ray."""
    delta = uav.position - target
    bearing = math.atan2(delta[1], delta[0])
    if not _blocked(world, uav.position, target):
        return None
    for k in range(8):
        ang = bearing + k * math.pi / 4.0
        cand = target + np.array([standoff * math.cos(ang),
                                  standoff * math.sin(ang),
                                  uav.position[2] - target[2]])
        if not _blocked(world, cand, target):
            return cand
    return None


def _blocked(world: World, a: np.ndarray, b: np.ndarray) -> bool:
    d = b - a
    dist = float(np.linalg.norm(d))
    if dist < 1e-9:
        return False
    return raycast(world, a, d / dist, dist) is not None


# ---------------------------------------------------------------------------
# Search & QA
# ---------------------------------------------------------------------------

@dataclass
class ViewCandidate:
    yaw: float
    score: float
    visible_tags: list[str]
    k: int = 0


def candidate_yaw(landmark: LandmarkNode, uav: UavState, ref: GeoPoint) -> float:
    """Yaw that faces the landmark from the UAV's current position."""
    p = gps_to_local(ref, landmark.gps)
    delta = p[:2] - uav.position[:2]
    if float(np.linalg.norm(delta)) < 0.1:
        raise DegenerateGeometry(f"landmark '{landmark.id}' on top of the UAV")
    return normalize_angle(math.atan2(delta[1], delta[0]))


def mock_view_score(nouns: list[str], frame: ViewFrame) -> float:
    """Tag overlap weighted toward the view center; SigLIP stand-in."""
    noun_set = set(t.lower() for t in nouns)
    camera = frame.camera
    score = 0.0
    for obj in frame.objects:
        tags = set(tokenize(obj.class_tag))
        for t in obj.landmark_tags:
            tags |= set(tokenize(t))
        overlap = len(noun_set & tags)
        if overlap == 0:
            continue
        offset = abs(math.atan((obj.centroid_pixel[0] - camera.cx) / camera.fx))
        score += overlap / (1.0 + offset)
    return score


def scan_views(world: World, uav: UavState, camera: CameraModel,
               center_yaw: float, nouns: list[str],
               scorer: Optional[Callable[[list[str], ViewFrame], float]] = None,
               ) -> ViewCandidate:
    """Scan adjacent viewing angles and keep the best-scoring one; ties go to
    the smaller |k|, then the smaller k (GPS-drift compensation)."""
    if not nouns:
        raise ValueError("nouns must be nonempty")
    scorer = scorer or mock_view_score
    candidates = []
    for k in range(-SCAN_HALF_SPAN, SCAN_HALF_SPAN + 1):
        yaw = normalize_angle(center_yaw + math.radians(SCAN_STEP_DEG) * k)
        pose = uav.copy()
        pose.yaw = yaw
        frame = render_view(world, pose=pose, camera=camera, with_depth=False)
        tags = sorted({t for o in frame.objects
                       for t in [o.class_tag] + list(o.landmark_tags)})
        candidates.append(ViewCandidate(yaw=yaw, score=scorer(nouns, frame),
                                        visible_tags=tags, k=k))
    best = min(candidates, key=lambda c: (-c.score, abs(c.k), c.k))
    if best.score <= 0.0:
        raise NoInformativeView("all scanned views scored zero")
    return best


NO_LANDMARK_ANSWER = "no relevant landmark visible"


class MockQABackend:
    """Answers with the best-overlap visible landmark's description."""

    def __init__(self, landmarks: list[LandmarkNode]):
        self.landmarks = landmarks

    def answer(self, question: str, frame: ViewFrame) -> str:
        visible_tokens = set()
        for o in frame.objects:
            for t in o.landmark_tags:
                visible_tokens |= set(tokenize(t))
        if not visible_tokens:
            return NO_LANDMARK_ANSWER
        q_tokens = set(tokenize(question))
        best, best_key = None, None
        for node in self.landmarks:
            node_tokens = set(tokenize(node.name))
            for a in node.aliases:
                node_tokens |= set(tokenize(a))
            if not (node_tokens & visible_tokens):
                continue
            overlap = len(q_tokens & (node_tokens | set(tokenize(node.orientation_tag))))
            key = (-overlap, node.id)
            if best_key is None or key < best_key:
                best, best_key = node, key
        if best is None:
            return NO_LANDMARK_ANSWER
        text = best.description or best.name
        if best.orientation_tag:
            return f"{text} ({best.orientation_tag})"
        return text


class RemoteQABackend:
    def __init__(self, url: str, timeout: float = 10.0):
        self.url = url
        self.timeout = timeout

    def answer(self, question: str, frame: ViewFrame) -> str:
        import httpx
        from .errors import BackendUnavailable
        payload = {
            "question": question,
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
            raise BackendUnavailable(f"QA backend: {e}") from e
        return str(resp.json()["answer"])


def answer_question(frame: ViewFrame, question: str, backend) -> str:
    return backend.answer(question, frame)
