"""Independent reference implementations used to cross-check the package.

Everything here is deliberately written from first principles (no imports
from airstar beyond plain data access) so a bug cannot hide in shared code.
"""
from __future__ import annotations

import heapq
import math

import numpy as np

SQRT2 = math.sqrt(2.0)


def dijkstra_cost(cells: np.ndarray, start: tuple[int, int],
                  goal: tuple[int, int]) -> float | None:
    """Shortest 8-connected path cost (1 / sqrt2 steps, no corner cutting);
    None when unreachable. Plain Dijkstra, no heuristic, no shared helpers."""
    h, w = cells.shape
    if cells[start] or cells[goal]:
        return None
    dist = {start: 0.0}
    heap = [(0.0, start)]
    while heap:
        d, (r, c) = heapq.heappop(heap)
        if (r, c) == goal:
            return d
        if d > dist.get((r, c), math.inf):
            continue
        for dr in (-1, 0, 1):
            for dc in (-1, 0, 1):
                if dr == 0 and dc == 0:
                    continue
                nr, nc = r + dr, c + dc
                if not (0 <= nr < h and 0 <= nc < w) or cells[nr, nc]:
                    continue
                if dr != 0 and dc != 0 and (cells[r, nc] or cells[nr, c]):
                    continue
                nd = d + (SQRT2 if dr != 0 and dc != 0 else 1.0)
                if nd < dist.get((nr, nc), math.inf) - 1e-12:
                    dist[(nr, nc)] = nd
                    heapq.heappush(heap, (nd, (nr, nc)))
    return None


def spherical_enu(ref_lat, ref_lon, lat, lon, radius=6_371_000.0):
    """Equirectangular ENU offset, written independently in one expression."""
    x = radius * math.cos(math.radians(ref_lat)) * math.radians(lon - ref_lon)
    y = radius * math.radians(lat - ref_lat)
    return x, y


def brute_force_nearest_occupied(cells: np.ndarray, r: int, c: int) -> float:
    """Chebyshev-ball BFS distance oracle for the distance transform."""
    h, w = cells.shape
    if cells[r, c]:
        return 0.0
    best = math.inf
    occ = np.argwhere(cells)
    for rr, cc in occ:
        # 8-neighbor BFS distance equals the Chebyshev distance in open space;
        # on small fully-scanned grids this is the exact expected field value
        best = min(best, max(abs(int(rr) - r), abs(int(cc) - c)))
    return best
