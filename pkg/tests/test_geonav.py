import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from airstar.errors import (GoalBlocked, NoPath, NotFound, OutOfRegion,
                            StartBlocked)
from airstar.geonav import (Trajectory, distance_transform, gps_to_local,
                            line_of_sight, local_to_gps, lookup_landmark,
                            octile, plan_waypoints, plan_waypoints_cells,
                            select_map, simplify_path, smooth_trajectory,
                            supercover_cells, tokenize)
from airstar.world.types import GeoPoint, GridKind, LandmarkNode

from conftest import empty_grid, make_grid
from oracles import brute_force_nearest_occupied, dijkstra_cost, spherical_enu

REF = GeoPoint(lat=39.98, lon=116.34, alt=0.0)


# ---------------------------------------------------------------------------
# GPS <-> local
# ---------------------------------------------------------------------------

class TestGeodesy:
    def test_lat_offset_matches_spherical_oracle(self):
        p = GeoPoint(lat=REF.lat + 0.001, lon=REF.lon, alt=0.0)
        local = gps_to_local(REF, p)
        ox, oy = spherical_enu(REF.lat, REF.lon, p.lat, p.lon)
        assert abs(local[0] - ox) < 1e-3
        assert abs(local[1] - oy) < 1e-3
        assert abs(local[1] - 111.195) < 5e-3   # hand value: R*0.001deg in rad

    def test_round_trip_identity(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            xy = rng.uniform(-2000, 2000, size=2)
            p = local_to_gps(REF, [xy[0], xy[1], 0.0])
            back = gps_to_local(REF, p)
            assert abs(back[0] - xy[0]) < 1e-6
            assert abs(back[1] - xy[1]) < 1e-6

    def test_out_of_region(self):
        with pytest.raises(OutOfRegion):
            gps_to_local(REF, GeoPoint(lat=REF.lat + 0.2, lon=REF.lon, alt=0.0))
        with pytest.raises(OutOfRegion):
            local_to_gps(REF, [50_000.0, 0.0, 0.0])

    def test_altitude_passthrough(self):
        p = GeoPoint(lat=REF.lat, lon=REF.lon, alt=12.5)
        assert gps_to_local(REF, p)[2] == pytest.approx(12.5)


# ---------------------------------------------------------------------------
# Landmark lookup
# ---------------------------------------------------------------------------

def _landmarks():
    return [
        LandmarkNode(id="a-court", name="Badminton Court",
                     gps=GeoPoint(39.98, 116.34, 0), orientation_tag="south",
                     description="", aliases=["sports hall"]),
        LandmarkNode(id="b-lib", name="Library",
                     gps=GeoPoint(39.981, 116.34, 0), orientation_tag="east",
                     description="", aliases=[]),
    ]


class TestLandmarkLookup:
    def test_exact_name(self):
        assert lookup_landmark(_landmarks(), "library").id == "b-lib"

    def test_alias(self):
        assert lookup_landmark(_landmarks(), "Sports Hall").id == "a-court"

    def test_token_overlap(self):
        assert lookup_landmark(_landmarks(), "the badminton place").id == "a-court"

    def test_no_match(self):
        with pytest.raises(NotFound):
            lookup_landmark(_landmarks(), "swimming pool")

    def test_select_map(self, world):
        assert select_map(world, "uav_autonomous").kind == GridKind.uav_exploration
        assert select_map(world, "pedestrian_guide").kind == GridKind.pedestrian_guidance


# ---------------------------------------------------------------------------
# A*
# ---------------------------------------------------------------------------

class TestAStar:
    def test_straight_line(self):
        g = empty_grid(10, 10)
        path = plan_waypoints_cells(g, (0, 0), (0, 9))
        assert path.cost == pytest.approx(9.0)
        assert path.cells == [(0, c) for c in range(10)]

    def test_diagonal(self):
        g = empty_grid(10, 10)
        path = plan_waypoints_cells(g, (0, 0), (9, 9))
        assert path.cost == pytest.approx(9 * math.sqrt(2))

    def test_no_corner_cutting(self):
        cells = np.zeros((3, 3), dtype=bool)
        cells[0, 1] = True
        cells[1, 0] = True
        g = make_grid(cells)
        with pytest.raises(NoPath):
            plan_waypoints_cells(g, (0, 0), (2, 2))

    def test_wall_detour(self):
        cells = np.zeros((5, 5), dtype=bool)
        cells[0:4, 2] = True
        g = make_grid(cells)
        path = plan_waypoints_cells(g, (0, 0), (0, 4))
        oracle = dijkstra_cost(cells, (0, 0), (0, 4))
        assert path.cost == pytest.approx(oracle)

    def test_blocked_endpoints(self):
        cells = np.zeros((4, 4), dtype=bool)
        cells[0, 0] = True
        cells[3, 3] = True
        g = make_grid(cells)
        with pytest.raises(StartBlocked):
            plan_waypoints_cells(g, (0, 0), (1, 1))
        with pytest.raises(GoalBlocked):
            plan_waypoints_cells(g, (1, 1), (3, 3))

    def test_point_interface(self):
        g = empty_grid(10, 10, origin=(-5.0, -5.0))
        path = plan_waypoints(g, [-4.5, -4.5], [4.5, -4.5])
        assert path.cost == pytest.approx(9.0)

    def test_dijkstra_oracle_random(self):
        rng = np.random.default_rng(42)
        solvable = 0
        for _ in range(100):
            cells = rng.random((30, 30)) < 0.30
            cells[0, 0] = False
            cells[29, 29] = False
            oracle = dijkstra_cost(cells, (0, 0), (29, 29))
            g = make_grid(cells)
            if oracle is None:
                with pytest.raises(NoPath):
                    plan_waypoints_cells(g, (0, 0), (29, 29))
            else:
                solvable += 1
                path = plan_waypoints_cells(g, (0, 0), (29, 29))
                assert path.cost == pytest.approx(oracle, abs=1e-9)
        assert solvable > 10

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=40, deadline=None)
    def test_path_properties(self, seed):
        rng = np.random.default_rng(seed)
        cells = rng.random((15, 15)) < 0.25
        cells[0, 0] = False
        cells[14, 14] = False
        g = make_grid(cells)
        try:
            path = plan_waypoints_cells(g, (0, 0), (14, 14))
        except NoPath:
            return
        # endpoints, adjacency, free cells, admissible lower bound
        assert path.cells[0] == (0, 0) and path.cells[-1] == (14, 14)
        assert path.cost >= octile((0, 0), (14, 14)) - 1e-9
        for a, b in zip(path.cells, path.cells[1:]):
            assert max(abs(a[0] - b[0]), abs(a[1] - b[1])) == 1
            assert not g.occupied(*b)


# ---------------------------------------------------------------------------
# Simplify / line of sight
# ---------------------------------------------------------------------------

class TestSimplify:
    def test_straight_path_two_points(self):
        g = empty_grid(10, 10)
        path = plan_waypoints_cells(g, (0, 0), (0, 9))
        wp = simplify_path(g, path)
        assert len(wp) == 2
        np.testing.assert_allclose(wp[0][:2], [0.5, 0.5])
        np.testing.assert_allclose(wp[-1][:2], [9.5, 0.5])

    def test_keeps_corner(self):
        cells = np.zeros((7, 7), dtype=bool)
        cells[0:6, 3] = True
        g = make_grid(cells)
        path = plan_waypoints_cells(g, (0, 0), (0, 6))
        wp = simplify_path(g, path)
        assert len(wp) > 2   # must bend around the wall

    def test_supercover_is_symmetric_superset(self):
        a, b = (0, 0), (3, 5)
        cells_ab = set(supercover_cells(a, b))
        cells_ba = set(supercover_cells(b, a))
        assert cells_ab == cells_ba
        assert a in cells_ab and b in cells_ab

    def test_line_of_sight_blocked(self):
        cells = np.zeros((5, 5), dtype=bool)
        cells[2, 2] = True
        g = make_grid(cells)
        assert not line_of_sight(g, (0, 0), (4, 4))
        assert line_of_sight(g, (0, 0), (0, 4))


# ---------------------------------------------------------------------------
# Distance transform
# ---------------------------------------------------------------------------

class TestDistanceTransform:
    def test_matches_chebyshev_oracle(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            cells = rng.random((12, 12)) < 0.2
            if not cells.any():
                cells[0, 0] = True
            g = make_grid(cells)
            field = distance_transform(g)
            for r in range(12):
                for c in range(12):
                    assert field[r, c] == pytest.approx(
                        brute_force_nearest_occupied(cells, r, c))

    def test_all_free_is_inf(self):
        field = distance_transform(empty_grid(4, 4))
        assert np.all(np.isinf(field))


# ---------------------------------------------------------------------------
# Smoothing
# ---------------------------------------------------------------------------

class TestSmoothing:
    def test_straight_line_endpoints(self):
        g = empty_grid(30, 30)
        wp = [np.array([2.5, 2.5, 5.0]), np.array([22.5, 2.5, 5.0])]
        traj = smooth_trajectory(wp, g, v_max=5.0, a_max=3.0)
        np.testing.assert_allclose(traj.position(0.0), wp[0], atol=1e-6)
        np.testing.assert_allclose(traj.position(traj.total_time), wp[1], atol=1e-6)

    def test_interior_waypoints_interpolated(self):
        g = empty_grid(40, 40)
        wp = [np.array([2.5, 2.5, 5.0]), np.array([20.5, 2.5, 5.0]),
              np.array([20.5, 20.5, 5.0])]
        traj = smooth_trajectory(wp, g, v_max=5.0, a_max=3.0, c_min=0.0)
        # interior waypoint hit at a span boundary
        assert min(np.linalg.norm(traj.position(j * traj.knot_dt) - wp[1])
                   for j in range(traj.n_spans + 1)) < 1e-6

    def test_speed_bound_implies_time_lower_bound(self):
        g = empty_grid(30, 30)
        wp = [np.array([2.5, 2.5, 5.0]), np.array([12.5, 2.5, 5.0])]
        traj = smooth_trajectory(wp, g, v_max=1.0, a_max=3.0)
        assert traj.total_time >= 10.0 - 1e-9

    def _l_bend(self):
        # corridor turning a corner around a block; clearance floor 1 m
        cells = np.zeros((30, 30), dtype=bool)
        cells[0:18, 8:18] = True
        return make_grid(cells)

    def test_l_bend_contract(self):
        g = self._l_bend()
        path = plan_waypoints_cells(g, (2, 2), (2, 25))
        wp = simplify_path(g, path, z=5.0)
        traj = smooth_trajectory(wp, g, v_max=5.0, a_max=3.0, c_min=1.0)
        dfield = distance_transform(g)
        ts = np.linspace(0.0, traj.total_time, traj.n_spans * 10 + 1)
        for t in ts:
            p = traj.position(t)
            r, c = g.point_to_cell(p[0], p[1])
            assert g.in_bounds(r, c)
            assert dfield[r, c] * g.resolution >= 1.0
            assert np.linalg.norm(traj.velocity(t)) <= 5.0 * (1 + 1e-9)
        np.testing.assert_allclose(traj.position(0.0)[:2], [2.5, 2.5], atol=1e-6)
        np.testing.assert_allclose(traj.position(traj.total_time)[:2],
                                   [25.5, 2.5], atol=1e-6)

    def test_sample_polyline_rounding(self):
        g = empty_grid(10, 10)
        wp = [np.array([1.5, 1.5, 5.0]), np.array([8.5, 1.5, 5.0])]
        traj = smooth_trajectory(wp, g, v_max=5.0, a_max=3.0)
        pts = traj.sample_polyline(0.1)
        assert pts[0] == [1.5, 1.5, 5.0]
        assert pts[-1] == [8.5, 1.5, 5.0]
        assert all(len(p) == 3 for p in pts)
