import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from airstar.camera import CameraModel, body_to_cam
from airstar.errors import InvalidDepth, NoTarget
from airstar.objectnav import (MockGroundingBackend, PixelTarget,
                               ground_target, instruction_nouns, median_depth,
                               object_nav_goal, pixel_to_world)
from airstar.world.types import FrameObject, UavState, ViewFrame


def cam():
    return CameraModel(fx=40.0, fy=40.0, cx=32.0, cy=24.0, width=64, height=48)


def obj(oid, tags, bbox, depth=5.0, class_tag="building"):
    return FrameObject(object_id=oid, class_tag=class_tag, landmark_tags=tags,
                       pixel_bbox=bbox,
                       centroid_depth=depth,
                       centroid_pixel=((bbox[0] + bbox[2]) / 2,
                                       (bbox[1] + bbox[3]) / 2))


def frame(objects, depth=None):
    return ViewFrame(depth=depth, objects=objects,
                     pose_at_capture=UavState(np.zeros(3), np.zeros(3)),
                     camera=cam())


class TestGrounding:
    def test_nouns_strip_stopwords(self):
        assert instruction_nouns("fly ahead of the red car") == ["red", "car"]

    def test_best_overlap_wins(self):
        f = frame([obj("a", ["library"], (0, 0, 10, 10)),
                   obj("b", ["teaching", "building"], (20, 20, 30, 30))])
        t = ground_target("go to the teaching building", f)
        assert (t.u, t.v) == (25.0, 25.0)

    def test_tie_breaks_largest_bbox_then_id(self):
        f = frame([obj("b", ["library"], (0, 0, 10, 10)),
                   obj("a", ["library"], (20, 20, 26, 26))])
        t = ground_target("the library", f)
        assert (t.u, t.v) == (5.0, 5.0)   # larger bbox wins
        f2 = frame([obj("b", ["library"], (0, 0, 10, 10)),
                    obj("a", ["library"], (20, 20, 30, 30))])
        t2 = ground_target("the library", f2)
        assert (t2.u, t2.v) == (25.0, 25.0)   # equal area: smaller id wins

    def test_no_match(self):
        f = frame([obj("a", ["library"], (0, 0, 10, 10))])
        with pytest.raises(NoTarget):
            ground_target("the swimming pool", f)

    def test_empty_frame(self):
        with pytest.raises(NoTarget):
            ground_target("anything", frame([]))


class TestDepth:
    def test_median_depth_3x3(self):
        d = np.full((48, 64), np.inf)
        d[23:26, 31:34] = [[4.0, 5.0, 6.0], [5.0, 5.0, 5.0], [4.0, 6.0, 7.0]]
        f = frame([], depth=d)
        assert median_depth(f, 32.0, 24.0) == 5.0

    def test_median_ignores_infinite(self):
        d = np.full((48, 64), np.inf)
        d[24, 32] = 3.0
        f = frame([], depth=d)
        assert median_depth(f, 32.0, 24.0) == 3.0

    def test_all_infinite_raises(self):
        f = frame([], depth=np.full((48, 64), np.inf))
        with pytest.raises(InvalidDepth):
            median_depth(f, 32.0, 24.0)

    def test_no_depth_raster_raises(self):
        with pytest.raises(InvalidDepth):
            median_depth(frame([]), 32.0, 24.0)

    def test_pixel_to_world_invalid_depth(self):
        uav = UavState(np.zeros(3), np.zeros(3))
        with pytest.raises(InvalidDepth):
            pixel_to_world(PixelTarget(32, 24), -1.0, cam(), uav)
        with pytest.raises(InvalidDepth):
            pixel_to_world(PixelTarget(32, 24), math.inf, cam(), uav)


class TestGoal:
    def _setup(self, depth_val=10.0):
        c = cam()
        d = np.full((48, 64), np.inf)
        d[:, :] = depth_val
        f = ViewFrame(depth=d,
                      objects=[obj("t", ["tower"], (28, 20, 36, 28),
                                   depth=depth_val)],
                      pose_at_capture=UavState(np.zeros(3), np.zeros(3)),
                      camera=c)
        uav = UavState(np.array([0.0, 0.0, 5.0]), np.zeros(3))
        return c, f, uav

    def test_default_pulls_back(self):
        c, f, uav = self._setup()
        goal = object_nav_goal("fly ahead of the tower", f, c, uav, standoff=2.0)
        # target straight ahead at 10 m; goal 2 m short of it
        assert goal[0] == pytest.approx(8.0)
        assert goal[1] == pytest.approx(0.0, abs=1e-9)

    def test_behind_pushes_past(self):
        c, f, uav = self._setup()
        goal = object_nav_goal("fly behind the tower", f, c, uav, standoff=2.0)
        assert goal[0] == pytest.approx(12.0)

    def test_above_raises_z(self):
        c, f, uav = self._setup()
        goal = object_nav_goal("fly above the tower", f, c, uav, standoff=2.0)
        assert goal[0] == pytest.approx(10.0)
        assert goal[2] == pytest.approx(7.0)

    def test_z_floor(self):
        c, f, uav = self._setup()
        uav.position = np.array([0.0, 0.0, 0.2])
        goal = object_nav_goal("fly ahead of the tower", f, c, uav, standoff=2.0)
        assert goal[2] >= 1.0

    @given(st.floats(0.0, 30.0), st.floats(0.5, 25.0))
    @settings(max_examples=60, deadline=None)
    def test_standoff_never_overshoots_uav(self, standoff, depth_val):
        c, f, uav = self._setup(depth_val=depth_val)
        goal = object_nav_goal("fly ahead of the tower", f, c, uav,
                               standoff=standoff)
        # goal stays between the UAV and the target in the horizontal plane
        assert -1e-9 <= goal[0] <= depth_val + 1e-9
