"""Long-range navigation: geodesy, landmark lookup, A* waypoints, smoothing.

Local frame is ENU meters about the scenario reference GPS point, using a
small-area equirectangular projection (campus-scale error < 1 cm/km).
"""
from __future__ import annotations

import heapq
import math
import re
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import (GoalBlocked, MissingGrid, NoPath, NotFound, OutOfRegion,
                     SmoothingFailed, StartBlocked)
from .world.types import GeoPoint, GridKind, LandmarkNode, OccupancyGrid, World

EARTH_RADIUS_M = 6_371_000.0
REGION_LIMIT_DEG = 0.1

# fixed neighbor expansion order: E, NE, N, NW, W, SW, S, SE
# rows grow north (+y), cols grow east (+x)
NEIGHBORS_8 = [
    (0, 1), (1, 1), (1, 0), (1, -1),
    (0, -1), (-1, -1), (-1, 0), (-1, 1),
]
SQRT2 = math.sqrt(2.0)


# ---------------------------------------------------------------------------
# GPS <-> local
# ---------------------------------------------------------------------------

def gps_to_local(ref: GeoPoint, p: GeoPoint) -> np.ndarray:
    """ENU meters of p relative to ref."""
    dlat = p.lat - ref.lat
    dlon = p.lon - ref.lon
    if abs(dlat) >= REGION_LIMIT_DEG or abs(dlon) >= REGION_LIMIT_DEG:
        raise OutOfRegion(f"point {p.lat},{p.lon} too far from reference for flat projection")
    x = EARTH_RADIUS_M * math.cos(math.radians(ref.lat)) * math.radians(dlon)
    y = EARTH_RADIUS_M * math.radians(dlat)
    return np.array([x, y, p.alt - ref.alt])


def local_to_gps(ref: GeoPoint, p) -> GeoPoint:
    """Inverse of gps_to_local."""
    p = np.asarray(p, dtype=float)
    dlat = math.degrees(p[1] / EARTH_RADIUS_M)
    dlon = math.degrees(p[0] / (EARTH_RADIUS_M * math.cos(math.radians(ref.lat))))
    if abs(dlat) >= REGION_LIMIT_DEG or abs(dlon) >= REGION_LIMIT_DEG:
        raise OutOfRegion("local point maps outside the flat-projection region")
    return GeoPoint(lat=ref.lat + dlat, lon=ref.lon + dlon, alt=ref.alt + p[2])


# ---------------------------------------------------------------------------
# Landmark lookup
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(r"[a-z0-9]+")


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


def lookup_landmark(landmarks: list[LandmarkNode], query: str) -> LandmarkNode:
    """Exact case-insensitive name/alias match wins, then best token overlap."""
    if not query:
        raise NotFound("empty landmark query")
    q = query.strip().lower()
    for node in sorted(landmarks, key=lambda n: n.id):
        names = [node.name.lower()] + [a.lower() for a in node.aliases]
        if q in names:
            return node
    q_tokens = set(tokenize(query))
    best, best_score = None, 0
    for node in sorted(landmarks, key=lambda n: n.id):
        node_tokens = set(tokenize(node.name))
        for alias in node.aliases:
            node_tokens |= set(tokenize(alias))
        score = len(q_tokens & node_tokens)
        if score > best_score:
            best, best_score = node, score
    if best is None:
        raise NotFound(f"no landmark matches '{query}'")
    return best


def select_map(world: World, mission_kind: str) -> OccupancyGrid:
    kind = {"uav_autonomous": GridKind.uav_exploration,
            "pedestrian_guide": GridKind.pedestrian_guidance}.get(mission_kind)
    if kind is None:
        raise MissingGrid(f"unknown mission kind '{mission_kind}'")
    grid = world.grid(kind)
    if grid is None:
        raise MissingGrid(f"scenario has no {kind.value} grid")
    return grid


# ---------------------------------------------------------------------------
# A* waypoint planning
# ---------------------------------------------------------------------------

@dataclass
class GridPath:
    cells: list[tuple[int, int]]
    cost: float


def octile(a: tuple[int, int], b: tuple[int, int]) -> float:
    dr = abs(a[0] - b[0])
    dc = abs(a[1] - b[1])
    return max(dr, dc) + (SQRT2 - 1.0) * min(dr, dc)


def grid_neighbors(grid: OccupancyGrid, cell: tuple[int, int]):
    """8-connected free neighbors; diagonals cannot cut corners."""
    r, c = cell
    for dr, dc in NEIGHBORS_8:
        nr, nc = r + dr, c + dc
        if not grid.in_bounds(nr, nc) or grid.occupied(nr, nc):
            continue
        if dr != 0 and dc != 0:
            if grid.occupied(r, nc) or grid.occupied(nr, c):
                continue
        yield (nr, nc), (SQRT2 if dr != 0 and dc != 0 else 1.0)


def plan_waypoints_cells(grid: OccupancyGrid, start: tuple[int, int],
                         goal: tuple[int, int]) -> GridPath:
    """Cost-optimal A* over grid cells; deterministic tie-breaking."""
    if not grid.in_bounds(*start) or grid.occupied(*start):
        raise StartBlocked(f"start cell {start} blocked or out of bounds")
    if not grid.in_bounds(*goal) or grid.occupied(*goal):
        raise GoalBlocked(f"goal cell {goal} blocked or out of bounds")
    if start == goal:
        return GridPath(cells=[start], cost=0.0)

    g = {start: 0.0}
    parent = {}
    seq = 0
    open_heap = [(octile(start, goal), octile(start, goal), seq, start)]
    closed = set()
    while open_heap:
        f, h, _, cell = heapq.heappop(open_heap)
        if cell in closed:
            continue
        if cell == goal:
            path = [cell]
            while path[-1] != start:
                path.append(parent[path[-1]])
            path.reverse()
            return GridPath(cells=path, cost=g[goal])
        closed.add(cell)
        for nb, step in grid_neighbors(grid, cell):
            if nb in closed:
                continue
            ng = g[cell] + step
            if ng < g.get(nb, math.inf) - 1e-12:
                g[nb] = ng
                parent[nb] = cell
                nh = octile(nb, goal)
                seq += 1
                heapq.heappush(open_heap, (ng + nh, nh, seq, nb))
    raise NoPath(f"no route from {start} to {goal}")


def plan_waypoints(grid: OccupancyGrid, start, goal) -> GridPath:
    """A* between two local points mapped onto the grid."""
    start = np.asarray(start, dtype=float)
    goal = np.asarray(goal, dtype=float)
    s = grid.point_to_cell(start[0], start[1])
    t = grid.point_to_cell(goal[0], goal[1])
    if not grid.in_bounds(*s) or grid.occupied(*s):
        raise StartBlocked(f"start {start[:2].tolist()} maps to blocked cell {s}")
    if not grid.in_bounds(*t) or grid.occupied(*t):
        raise GoalBlocked(f"goal {goal[:2].tolist()} maps to blocked cell {t}")
    return plan_waypoints_cells(grid, s, t)


# ---------------------------------------------------------------------------
# Line-of-sight pruning
# ---------------------------------------------------------------------------

def supercover_cells(a: tuple[int, int], b: tuple[int, int]):
    """Every cell the segment between the centers of a and b passes through."""
    (r0, c0), (r1, c1) = a, b
    x0, y0 = c0 + 0.5, r0 + 0.5
    x1, y1 = c1 + 0.5, r1 + 0.5
    dx, dy = x1 - x0, y1 - y0
    n = 1
    col, row = c0, r0
    x_inc = y_inc = 0
    err = 0.0
    if dx == 0:
        x_inc = 0
        err = math.inf
    elif dx > 0:
        x_inc = 1
        n += c1 - c0
        err = (c0 + 1 - x0) * abs(dy)
    else:
        x_inc = -1
        n += c0 - c1
        err = (x0 - c0) * abs(dy)
    if dy == 0:
        y_inc = 0
        err = -math.inf
    elif dy > 0:
        y_inc = 1
        n += r1 - r0
        err -= (r0 + 1 - y0) * abs(dx)
    else:
        y_inc = -1
        n += r0 - r1
        err -= (y0 - r0) * abs(dx)
    done = 0
    while done < n:
        yield (row, col)
        done += 1
        if err > 0:
            row += y_inc
            err -= abs(dx)
        elif err < 0:
            col += x_inc
            err += abs(dy)
        else:
            # exact corner crossing: step both (conservative, visits neither
            # diagonal-adjacent cell alone)
            row += y_inc
            col += x_inc
            err += abs(dy) - abs(dx)
            n -= 1


def line_of_sight(grid: OccupancyGrid, a: tuple[int, int], b: tuple[int, int],
                  distance_field: np.ndarray | None = None,
                  c_min_cells: float = 0.0) -> bool:
    """True when the straight grid walk a->b crosses no blocked cell."""
    for cell in supercover_cells(a, b):
        if not grid.in_bounds(*cell):
            return False
        if grid.occupied(*cell):
            return False
        if distance_field is not None and distance_field[cell] < c_min_cells:
            return False
    return True


def simplify_path(grid: OccupancyGrid, path: GridPath,
                  c_min: float = 0.0, z: float = 0.0) -> list[np.ndarray]:
    """Greedy line-of-sight pruning down to critical waypoints (cell centers)."""
    cells = path.cells
    if len(cells) == 1:
        x, y = grid.cell_center(*cells[0])
        return [np.array([x, y, z])]
    dfield = None
    c_min_cells = 0.0
    if c_min > 0.0:
        dfield = distance_transform(grid)
        c_min_cells = c_min / grid.resolution
    kept = [cells[0]]
    anchor = cells[0]
    for j in range(1, len(cells) - 1):
        if not line_of_sight(grid, anchor, cells[j + 1], dfield, c_min_cells):
            kept.append(cells[j])
            anchor = cells[j]
    kept.append(cells[-1])
    out = []
    for cell in kept:
        x, y = grid.cell_center(*cell)
        out.append(np.array([x, y, z]))
    return out


# ---------------------------------------------------------------------------
# Distance transform and B-spline smoothing
# ---------------------------------------------------------------------------

def distance_transform(grid: OccupancyGrid) -> np.ndarray:
    """8-neighbor BFS distance (in cells) to the nearest occupied cell."""
    dist = np.full((grid.height, grid.width), np.inf)
    q = deque()
    occ = np.argwhere(grid.cells)
    for r, c in occ:
        dist[r, c] = 0.0
        q.append((int(r), int(c)))
    while q:
        r, c = q.popleft()
        nd = dist[r, c] + 1.0
        for dr, dc in NEIGHBORS_8:
            nr, nc = r + dr, c + dc
            if 0 <= nr < grid.height and 0 <= nc < grid.width and dist[nr, nc] > nd:
                dist[nr, nc] = nd
                q.append((nr, nc))
    return dist


def _basis(u: float) -> np.ndarray:
    return np.array([
        (1 - u) ** 3 / 6.0,
        (3 * u ** 3 - 6 * u ** 2 + 4) / 6.0,
        (-3 * u ** 3 + 3 * u ** 2 + 3 * u + 1) / 6.0,
        u ** 3 / 6.0,
    ])


def _basis_d1(u: float) -> np.ndarray:
    return np.array([
        -((1 - u) ** 2) / 2.0,
        (9 * u ** 2 - 12 * u) / 6.0,
        (-9 * u ** 2 + 6 * u + 3) / 6.0,
        u ** 2 / 2.0,
    ])


def _basis_d2(u: float) -> np.ndarray:
    return np.array([1.0 - u, 3 * u - 2.0, 1.0 - 3 * u, u])


@dataclass
class Trajectory:
    """Uniform cubic B-spline, time-parameterized by a shared knot interval."""
    control_points: np.ndarray        # (n, 3)
    knot_dt: float
    total_time: float = field(init=False)

    def __post_init__(self):
        self.control_points = np.asarray(self.control_points, dtype=float)
        if len(self.control_points) < 4:
            raise ValueError("trajectory needs at least 4 control points")
        self.total_time = self.n_spans * self.knot_dt

    @property
    def n_spans(self) -> int:
        return len(self.control_points) - 3

    def _span_u(self, t: float) -> tuple[int, float]:
        s = min(max(t / self.knot_dt, 0.0), float(self.n_spans))
        j = min(int(s), self.n_spans - 1)
        return j, s - j

    def position(self, t: float) -> np.ndarray:
        j, u = self._span_u(t)
        return _basis(u) @ self.control_points[j:j + 4]

    def velocity(self, t: float) -> np.ndarray:
        j, u = self._span_u(t)
        return (_basis_d1(u) @ self.control_points[j:j + 4]) / self.knot_dt

    def acceleration(self, t: float) -> np.ndarray:
        j, u = self._span_u(t)
        return (_basis_d2(u) @ self.control_points[j:j + 4]) / self.knot_dt ** 2

    def sample(self, per_span: int = 10) -> np.ndarray:
        ts = np.linspace(0.0, self.total_time, self.n_spans * per_span + 1)
        return np.array([self.position(t) for t in ts])

    def sample_polyline(self, dt: float) -> list[list[float]]:
        n = max(2, int(math.ceil(self.total_time / dt)) + 1)
        ts = np.linspace(0.0, self.total_time, n)
        return [[round(float(v), 4) for v in self.position(t)] for t in ts]


def _interpolating_controls(waypoints: np.ndarray) -> np.ndarray:
    """Control points of a uniform cubic B-spline through the waypoints.

    Natural end conditions (zero end curvature) give exact endpoint
    interpolation; interior waypoints are hit at span boundaries.
    """
    w = np.asarray(waypoints, dtype=float)
    m = len(w) - 1
    ctrl = np.zeros((m + 3, 3))
    ctrl[1] = w[0]
    ctrl[m + 1] = w[m]
    if m >= 2:
        # tridiagonal system: P_j + 4 P_{j+1} + P_{j+2} = 6 w_j, j = 1..m-1
        n_unknown = m - 1
        A = np.zeros((n_unknown, n_unknown))
        b = 6.0 * w[1:m].copy()
        for i in range(n_unknown):
            A[i, i] = 4.0
            if i > 0:
                A[i, i - 1] = 1.0
            if i < n_unknown - 1:
                A[i, i + 1] = 1.0
        b[0] -= w[0]
        b[-1] -= w[m]
        ctrl[2:m + 1] = np.linalg.solve(A, b)
    ctrl[0] = 2 * ctrl[1] - ctrl[2]
    ctrl[m + 2] = 2 * ctrl[m + 1] - ctrl[m]
    return ctrl


def _clearance_at(grid: OccupancyGrid, dfield: np.ndarray, point: np.ndarray) -> float:
    r, c = grid.point_to_cell(point[0], point[1])
    if not grid.in_bounds(r, c):
        return math.inf
    return float(dfield[r, c]) * grid.resolution


def smooth_trajectory(waypoints, grid: OccupancyGrid, v_max: float, a_max: float,
                      c_min: float = 1.0, max_iter: int = 50,
                      samples_per_span: int = 10) -> Trajectory:
    """Clearance-aware B-spline through the critical waypoints.

    Sampled points below the clearance floor push their dominating control
    point along the occupancy distance-field gradient; feasibility is then
    enforced by uniform time re-scaling.
    """
    w = np.asarray([np.asarray(p, dtype=float) for p in waypoints])
    if len(w) < 2:
        raise ValueError("need at least 2 waypoints")
    ctrl = _interpolating_controls(w)
    dfield = distance_transform(grid)

    chords = np.linalg.norm(np.diff(w, axis=0), axis=1)
    knot_dt = max(float(chords.max()) / max(v_max, 1e-9), 0.1)
    n_spans = len(ctrl) - 3
    protected = {0, 1, 2, len(ctrl) - 3, len(ctrl) - 2, len(ctrl) - 1}

    def violations():
        out = []
        for j in range(n_spans):
            for k in range(samples_per_span + 1):
                u = k / samples_per_span
                p = _basis(u) @ ctrl[j:j + 4]
                cl = _clearance_at(grid, dfield, p)
                if cl < c_min:
                    out.append((cl, j, u))
        return out

    for _ in range(max_iter):
        viol = violations()
        if not viol:
            break
        cl, j, u = min(viol, key=lambda v: v[0])
        weights = _basis(u)
        order = np.argsort(-weights)
        idx = None
        for o in order:
            if (j + int(o)) not in protected:
                idx = j + int(o)
                break
        if idx is None:
            raise SmoothingFailed("clearance violation near a fixed endpoint")
        r, c = grid.point_to_cell(ctrl[idx][0], ctrl[idx][1])
        r = min(max(r, 1), grid.height - 2)
        c = min(max(c, 1), grid.width - 2)
        gx = (dfield[r, c + 1] - dfield[r, c - 1]) / 2.0
        gy = (dfield[r + 1, c] - dfield[r - 1, c]) / 2.0
        g = np.array([gx, gy, 0.0])
        norm = np.linalg.norm(g)
        if norm < 1e-12 or not np.isfinite(norm):
            raise SmoothingFailed("distance-field gradient vanished during repair")
        ctrl[idx] = ctrl[idx] + g / norm * (0.5 * grid.resolution)
    else:
        if violations():
            raise SmoothingFailed(f"clearance below {c_min} m after {max_iter} repair iterations")

    # uniform time re-scaling to meet speed and acceleration bounds
    v_peak = 0.0
    a_peak = 0.0
    for j in range(n_spans):
        for k in range(samples_per_span + 1):
            u = k / samples_per_span
            v = np.linalg.norm(_basis_d1(u) @ ctrl[j:j + 4]) / knot_dt
            a = np.linalg.norm(_basis_d2(u) @ ctrl[j:j + 4]) / knot_dt ** 2
            v_peak = max(v_peak, v)
            a_peak = max(a_peak, a)
    scale = max(1.0, v_peak / v_max, math.sqrt(a_peak / a_max) if a_max > 0 else 1.0)
    return Trajectory(control_points=ctrl, knot_dt=knot_dt * scale)
