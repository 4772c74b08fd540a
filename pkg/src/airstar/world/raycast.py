"""Grid DDA raycasting; stands in for the lidar."""
from __future__ import annotations

import math
from typing import Optional

import numpy as np

from .types import OccupancyGrid, World


def _z_interval_hit(oz: float, dz: float, t0: float, t1: float, h: float) -> Optional[float]:
    """First t in [t0, t1] where oz + t*dz lies within [0, h], or None."""
    if dz == 0.0:
        return t0 if 0.0 <= oz <= h else None
    ta = (0.0 - oz) / dz
    tb = (h - oz) / dz
    lo, hi = (ta, tb) if ta <= tb else (tb, ta)
    lo = max(lo, t0)
    hi = min(hi, t1)
    return lo if lo <= hi else None


def raycast_grid(grid: OccupancyGrid, origin: np.ndarray, direction: np.ndarray,
                 max_range: float, obstacle_height: float) -> Optional[float]:
    """Amanatides-Woo traversal over occupied cells extruded to obstacle_height."""
    ox, oy, oz = float(origin[0]), float(origin[1]), float(origin[2])
    dx, dy, dz = float(direction[0]), float(direction[1]), float(direction[2])
    res = grid.resolution

    # clip the parameter range to the grid's xy footprint
    t_enter, t_exit = 0.0, max_range
    for o, d, lo, hi in ((ox, dx, grid.origin[0], grid.origin[0] + grid.width * res),
                         (oy, dy, grid.origin[1], grid.origin[1] + grid.height * res)):
        if d == 0.0:
            if not (lo <= o <= hi):
                return None
        else:
            ta, tb = (lo - o) / d, (hi - o) / d
            if ta > tb:
                ta, tb = tb, ta
            t_enter = max(t_enter, ta)
            t_exit = min(t_exit, tb)
    if t_enter > t_exit:
        return None

    px = ox + t_enter * dx
    py = oy + t_enter * dy
    row, col = grid.point_to_cell(px, py)
    row = min(max(row, 0), grid.height - 1)
    col = min(max(col, 0), grid.width - 1)

    step_c = 1 if dx > 0 else (-1 if dx < 0 else 0)
    step_r = 1 if dy > 0 else (-1 if dy < 0 else 0)
    t_max_x = math.inf
    t_max_y = math.inf
    t_delta_x = math.inf
    t_delta_y = math.inf
    if dx != 0:
        next_x = grid.origin[0] + (col + (1 if dx > 0 else 0)) * res
        t_max_x = (next_x - ox) / dx
        t_delta_x = res / abs(dx)
    if dy != 0:
        next_y = grid.origin[1] + (row + (1 if dy > 0 else 0)) * res
        t_max_y = (next_y - oy) / dy
        t_delta_y = res / abs(dy)

    t = t_enter
    while t <= t_exit:
        t_next = min(t_max_x, t_max_y, t_exit)
        if grid.in_bounds(row, col) and grid.occupied(row, col):
            hit = _z_interval_hit(oz, dz, t, min(t_next, max_range), obstacle_height)
            if hit is not None and hit <= max_range:
                return max(hit, 0.0)
        if t_next >= t_exit:
            break
        if t_max_x <= t_max_y:
            col += step_c
            t = t_max_x
            t_max_x += t_delta_x
        else:
            row += step_r
            t = t_max_y
            t_max_y += t_delta_y
        if not grid.in_bounds(row, col):
            break
    return None


def raycast(world: World, origin, direction, max_range: float) -> Optional[float]:
    """Distance to the first occupied cell or terrain along a unit ray, or None."""
    origin = np.asarray(origin, dtype=float)
    direction = np.asarray(direction, dtype=float)
    n = float(np.linalg.norm(direction))
    if abs(n - 1.0) > 1e-9:
        raise ValueError(f"direction must be a unit vector, |d| = {n}")
    if max_range <= 0:
        raise ValueError("max_range must be positive")

    best = None
    hit = raycast_grid(world.uav_grid, origin, direction, max_range, world.obstacle_height)
    if hit is not None:
        best = hit
    # flat terrain at z = 0
    if direction[2] < 0.0 and origin[2] > 0.0:
        t_ground = -origin[2] / direction[2]
        if 0.0 < t_ground <= max_range and (best is None or t_ground < best):
            best = t_ground
    return best


def has_line_of_sight(world: World, a, b) -> bool:
    """True when the straight segment a->b is unobstructed."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    d = b - a
    dist = float(np.linalg.norm(d))
    if dist < 1e-9:
        return True
    hit = raycast(world, a, d / dist, dist)
    return hit is None
