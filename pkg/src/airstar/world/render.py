"""Synthetic RGB-D stand-in: per-pixel z-depth plus object annotations."""
from __future__ import annotations

import math

import numpy as np

from ..camera import CameraModel, project, world_to_camera
from ..geometry import yaw_matrix
from .types import FrameObject, OccupancyGrid, SceneObject, UavState, ViewFrame, World

_GRID_BOX_CACHE: dict[int, np.ndarray] = {}


def grid_run_boxes(grid: OccupancyGrid, height: float) -> np.ndarray:
    """Occupied cells merged into per-row runs of extruded AABBs, shape (n, 6)."""
    key = (id(grid), hash(grid.cells.tobytes()))
    cached = _GRID_BOX_CACHE.get(key)
    if cached is not None:
        return cached
    boxes = []
    res = grid.resolution
    for r in range(grid.height):
        row = grid.cells[r]
        c = 0
        while c < grid.width:
            if row[c]:
                c0 = c
                while c < grid.width and row[c]:
                    c += 1
                x0 = grid.origin[0] + c0 * res
                x1 = grid.origin[0] + c * res
                y0 = grid.origin[1] + r * res
                y1 = y0 + res
                boxes.append([x0, y0, 0.0, x1, y1, height])
            else:
                c += 1
    out = np.asarray(boxes, dtype=float).reshape(-1, 6)
    _GRID_BOX_CACHE[key] = out
    return out


def _all_boxes(world: World) -> tuple[np.ndarray, list[SceneObject]]:
    objs = world.scene_objects()
    grid_boxes = grid_run_boxes(world.uav_grid, world.obstacle_height)
    if objs:
        rows = np.asarray([np.concatenate([o.box_min, o.box_max]) for o in objs])
        boxes = np.vstack([rows, grid_boxes]) if grid_boxes.size else rows
    else:
        boxes = grid_boxes
    return boxes, objs


def ray_entries(origin: np.ndarray, direction: np.ndarray, boxes: np.ndarray) -> np.ndarray:
    """Entry parameter per box for one ray (inf = miss); direction need not be unit."""
    if boxes.size == 0:
        return np.empty(0)
    with np.errstate(divide="ignore", invalid="ignore"):
        t1 = (boxes[:, :3] - origin) / direction
        t2 = (boxes[:, 3:] - origin) / direction
    lo = np.minimum(t1, t2)
    hi = np.maximum(t1, t2)
    zero = direction == 0.0
    if zero.any():
        inside = (origin >= boxes[:, :3]) & (origin <= boxes[:, 3:])
        lo = np.where(zero, np.where(inside, -np.inf, np.inf), lo)
        hi = np.where(zero, np.where(inside, np.inf, -np.inf), hi)
    s_in = lo.max(axis=1)
    s_out = hi.min(axis=1)
    return np.where((s_in <= s_out) & (s_out > 0.0), np.maximum(s_in, 0.0), np.inf)


def _first_hit(origin: np.ndarray, direction: np.ndarray, boxes: np.ndarray) -> float:
    """First-hit parameter along one ray over all boxes and the ground plane."""
    s = float(ray_entries(origin, direction, boxes).min()) if boxes.size else math.inf
    if direction[2] < 0.0 and origin[2] > 0.0:
        s = min(s, -origin[2] / direction[2])
    return s


def _depth_raster(origins: np.ndarray, dirs: np.ndarray, boxes: np.ndarray) -> np.ndarray:
    """First-hit parameter for many rays (vectorized per box)."""
    n = dirs.shape[0]
    depth = np.full(n, np.inf)
    for box in boxes:
        with np.errstate(divide="ignore", invalid="ignore"):
            t1 = (box[:3] - origins) / dirs
            t2 = (box[3:] - origins) / dirs
        lo = np.minimum(t1, t2)
        hi = np.maximum(t1, t2)
        zero = dirs == 0.0
        if zero.any():
            inside = (origins >= box[:3]) & (origins <= box[3:])
            lo = np.where(zero, np.where(inside, -np.inf, np.inf), lo)
            hi = np.where(zero, np.where(inside, np.inf, -np.inf), hi)
        s_in = lo.max(axis=-1)
        s_out = hi.min(axis=-1)
        s = np.where((s_in <= s_out) & (s_out > 0.0), np.maximum(s_in, 0.0), np.inf)
        depth = np.minimum(depth, s)
    dz = dirs[:, 2]
    oz = origins[:, 2]
    with np.errstate(divide="ignore", invalid="ignore"):
        s_ground = np.where((dz < 0.0) & (oz > 0.0), -oz / dz, np.inf)
    return np.minimum(depth, s_ground)


def render_view(world: World, pose: UavState | None = None,
                camera: CameraModel | None = None,
                with_depth: bool = True) -> ViewFrame:
    """Raycast depth and annotate every visible, unoccluded scene object.

    Depth is z-depth: the ray parameter along the unnormalized camera-frame
    direction ((u-cx)/fx, (v-cy)/fy, 1), which equals the camera-forward
    component of the hit point.
    """
    pose = (pose or world.uav).copy()
    camera = camera or world.camera
    boxes, objs = _all_boxes(world)
    cam_to_world = yaw_matrix(pose.yaw) @ camera.extrinsic_r.T
    cam_pos = pose.position - yaw_matrix(pose.yaw) @ (camera.extrinsic_r.T @ camera.extrinsic_t)

    depth = None
    if with_depth:
        us, vs = np.meshgrid(np.arange(camera.width) + 0.5,
                             np.arange(camera.height) + 0.5)
        dirs_cam = np.stack([(us - camera.cx) / camera.fx,
                             (vs - camera.cy) / camera.fy,
                             np.ones_like(us)], axis=-1).reshape(-1, 3)
        dirs_world = dirs_cam @ cam_to_world.T
        origins = np.broadcast_to(cam_pos, dirs_world.shape)
        depth = _depth_raster(origins, dirs_world, boxes).reshape(
            camera.height, camera.width)

    frame_objects = []
    for i, obj in enumerate(objs):
        pc = world_to_camera(obj.center, camera, pose.position, pose.yaw)
        if pc[2] <= 0.0:
            continue
        u = camera.fx * pc[0] / pc[2] + camera.cx
        v = camera.fy * pc[1] / pc[2] + camera.cy
        if not (0.0 <= u < camera.width and 0.0 <= v < camera.height):
            continue
        # occlusion: the centroid ray's first hit must belong to this object
        dir_cam = np.array([(u - camera.cx) / camera.fx, (v - camera.cy) / camera.fy, 1.0])
        dir_world = cam_to_world @ dir_cam
        entries = ray_entries(cam_pos, dir_world, boxes)
        first = float(entries.min())
        if dir_world[2] < 0.0 and cam_pos[2] > 0.0:
            first = min(first, -cam_pos[2] / dir_world[2])
        own = float(entries[i])
        if not math.isfinite(own) or own > first + 1e-9:
            continue
        bbox = _project_bbox(_box_corners(obj), camera, pose)
        if bbox is None:
            continue
        frame_objects.append(FrameObject(
            object_id=obj.id,
            class_tag=obj.class_tag,
            landmark_tags=list(obj.landmark_tags),
            pixel_bbox=bbox,
            centroid_depth=own,
            centroid_pixel=(float(u), float(v)),
        ))

    return ViewFrame(depth=depth, objects=frame_objects,
                     pose_at_capture=pose, camera=camera)


def _box_corners(obj: SceneObject) -> np.ndarray:
    lo, hi = obj.box_min, obj.box_max
    return np.array([[x, y, z] for x in (lo[0], hi[0])
                     for y in (lo[1], hi[1]) for z in (lo[2], hi[2])])


def _project_bbox(corners: np.ndarray, camera: CameraModel, pose: UavState):
    us, vs = [], []
    for c in corners:
        pr = project(c, camera, pose.position, pose.yaw)
        if pr is None:
            continue
        us.append(pr[0])
        vs.append(pr[1])
    if not us:
        return None
    u_min = max(0.0, min(us))
    v_min = max(0.0, min(vs))
    u_max = min(float(camera.width - 1), max(us))
    v_max = min(float(camera.height - 1), max(vs))
    if u_max < u_min or v_max < v_min:
        return None
    return (u_min, v_min, u_max, v_max)
