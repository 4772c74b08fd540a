from .types import (FrameObject, GeoPoint, GridKind, LandmarkNode, Limits,
                    OccupancyGrid, Pedestrian, SceneObject, UavMode, UavState,
                    ViewFrame, World)
from .scenario import load_scenario, load_scenario_dict, encode_cells, decode_cells
from .sim import ControlInput, step, TICK_DT
from .raycast import raycast, has_line_of_sight
from .render import render_view

__all__ = [
    "FrameObject", "GeoPoint", "GridKind", "LandmarkNode", "Limits",
    "OccupancyGrid", "Pedestrian", "SceneObject", "UavMode", "UavState",
    "ViewFrame", "World", "load_scenario", "load_scenario_dict",
    "encode_cells", "decode_cells", "ControlInput", "step", "TICK_DT",
    "raycast", "has_line_of_sight", "render_view",
]
