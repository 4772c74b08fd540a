"""Scenario file loading and validation."""
from __future__ import annotations

import base64
import json
from pathlib import Path

import numpy as np

from ..camera import CameraModel
from ..errors import ConsistencyError, SchemaError
from .types import (GeoPoint, GridKind, LandmarkNode, Limits, OccupancyGrid,
                    Pedestrian, SceneObject, UavState, UavMode, World)

REQUIRED_KEYS = ["seed", "reference_gps", "grids", "landmarks", "pedestrians",
                 "uav_start", "camera", "limits"]


def _require(d: dict, key: str, ctx: str):
    if key not in d:
        raise SchemaError(f"{ctx}: missing required key '{key}'")
    return d[key]


def _geo_point(d: dict, ctx: str) -> GeoPoint:
    try:
        return GeoPoint(lat=float(_require(d, "lat", ctx)),
                        lon=float(_require(d, "lon", ctx)),
                        alt=float(d.get("alt", 0.0)))
    except (TypeError, ValueError) as e:
        raise SchemaError(f"{ctx}: {e}") from e


def decode_cells(spec, width: int, height: int) -> np.ndarray:
    """Accepts a base64-packed bitfield or a list of occupied [row, col] pairs."""
    cells = np.zeros((height, width), dtype=bool)
    if isinstance(spec, str):
        packed = np.frombuffer(base64.b64decode(spec), dtype=np.uint8)
        bits = np.unpackbits(packed)[: width * height]
        if bits.size < width * height:
            raise SchemaError("grid bitfield shorter than width*height")
        cells = bits.astype(bool).reshape(height, width)
    elif isinstance(spec, list):
        for pair in spec:
            if not (isinstance(pair, (list, tuple)) and len(pair) == 2):
                raise SchemaError(f"occupied-cell entry must be [row, col], got {pair!r}")
            r, c = int(pair[0]), int(pair[1])
            if not (0 <= r < height and 0 <= c < width):
                raise ConsistencyError(f"occupied cell ({r},{c}) outside {height}x{width} grid")
            cells[r, c] = True
    else:
        raise SchemaError(f"grid cells must be base64 string or pair list, got {type(spec).__name__}")
    return cells


def encode_cells(cells: np.ndarray) -> str:
    packed = np.packbits(cells.astype(np.uint8).ravel())
    return base64.b64encode(packed.tobytes()).decode("ascii")


def _load_grid(d: dict, idx: int) -> OccupancyGrid:
    ctx = f"grids[{idx}]"
    kind_s = _require(d, "kind", ctx)
    try:
        kind = GridKind(kind_s)
    except ValueError:
        raise SchemaError(f"{ctx}: unknown grid kind '{kind_s}'")
    width = int(_require(d, "width", ctx))
    height = int(_require(d, "height", ctx))
    res = float(_require(d, "resolution", ctx))
    if res <= 0:
        raise SchemaError(f"{ctx}: resolution must be positive")
    origin = np.asarray(_require(d, "origin", ctx), dtype=float)
    cells = decode_cells(_require(d, "cells", ctx), width, height)
    return OccupancyGrid(kind=kind, origin=origin, resolution=res,
                         width=width, height=height, cells=cells)


def load_scenario_dict(doc: dict) -> World:
    if not isinstance(doc, dict):
        raise SchemaError("scenario root must be a JSON object")
    for key in REQUIRED_KEYS:
        _require(doc, key, "scenario")

    ref = _geo_point(doc["reference_gps"], "reference_gps")
    grids = {}
    for i, gd in enumerate(doc["grids"]):
        grid = _load_grid(gd, i)
        if grid.kind in grids:
            raise ConsistencyError(f"duplicate grid kind '{grid.kind.value}'")
        grids[grid.kind] = grid

    landmarks = []
    seen_ids = set()
    for i, ld in enumerate(doc["landmarks"]):
        ctx = f"landmarks[{i}]"
        node = LandmarkNode(
            id=str(_require(ld, "id", ctx)),
            name=str(_require(ld, "name", ctx)),
            gps=_geo_point(_require(ld, "gps", ctx), f"{ctx}.gps"),
            orientation_tag=str(ld.get("orientation_tag", "")),
            description=str(ld.get("description", "")),
            aliases=[str(a) for a in ld.get("aliases", [])],
        )
        if node.id in seen_ids:
            raise ConsistencyError(f"duplicate landmark id '{node.id}'")
        seen_ids.add(node.id)
        landmarks.append(node)

    pedestrians = []
    for i, pd in enumerate(doc["pedestrians"]):
        ctx = f"pedestrians[{i}]"
        try:
            ped = Pedestrian(
                id=str(_require(pd, "id", ctx)),
                position=np.asarray(_require(pd, "position", ctx), dtype=float),
                path=[np.asarray(w, dtype=float) for w in pd.get("path", [])],
                speed=float(pd.get("speed", 1.2)),
                is_user=bool(pd.get("is_user", False)),
            )
        except ValueError as e:
            raise ConsistencyError(f"{ctx}: {e}") from e
        pedestrians.append(ped)
    n_users = sum(1 for p in pedestrians if p.is_user)
    if n_users != 1:
        raise ConsistencyError(f"exactly one pedestrian must have is_user=true, found {n_users}")

    objects = []
    for i, od in enumerate(doc.get("objects", [])):
        ctx = f"objects[{i}]"
        objects.append(SceneObject(
            id=str(_require(od, "id", ctx)),
            class_tag=str(_require(od, "class_tag", ctx)),
            center=np.asarray(_require(od, "center", ctx), dtype=float),
            size=np.asarray(_require(od, "size", ctx), dtype=float),
            landmark_tags=[str(t) for t in od.get("landmark_tags", [])],
        ))

    try:
        camera = CameraModel.from_dict(doc["camera"])
    except (KeyError, TypeError) as e:
        raise SchemaError(f"camera: {e}") from e
    except ValueError as e:
        raise ConsistencyError(f"camera: {e}") from e

    us = doc["uav_start"]
    uav = UavState(position=np.asarray(_require(us, "position", "uav_start"), dtype=float),
                   velocity=np.zeros(3),
                   yaw=float(us.get("yaw", 0.0)),
                   mode=UavMode.grounded)

    world = World(
        reference_gps=ref,
        grids=grids,
        landmarks=landmarks,
        pedestrians=pedestrians,
        objects=objects,
        uav=uav,
        camera=camera,
        limits=Limits.from_dict(doc["limits"]),
        seed=int(doc["seed"]),
        z_cruise=float(doc.get("z_cruise", 5.0)),
        obstacle_height=float(doc.get("obstacle_height", 10.0)),
    )

    # landmarks must land inside at least one grid's footprint
    from ..geonav import gps_to_local
    for node in landmarks:
        p = gps_to_local(ref, node.gps)
        if not any(g.contains_point(p[0], p[1]) for g in grids.values()):
            raise ConsistencyError(f"landmark '{node.id}' maps outside every grid")

    return world


def load_scenario(path: str | Path) -> World:
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"scenario file not found: {path}")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise SchemaError(f"scenario is not valid JSON: {e}") from e
    return load_scenario_dict(doc)
