"""Regenerates the campus scenario fixture (scenarios/campus.json)."""
import json
import math
from pathlib import Path

import numpy as np

R = 6_371_000.0
REF_LAT, REF_LON = 39.98, 116.34


def to_gps(x, y, alt=0.0):
    lat = REF_LAT + math.degrees(y / R)
    lon = REF_LON + math.degrees(x / (R * math.cos(math.radians(REF_LAT))))
    return {"lat": lat, "lon": lon, "alt": alt}


W = H = 200          # cells, 1 m/cell, origin (-100, -100)
ORIGIN = (-100.0, -100.0)


def fill_rect(cells, x0, y0, x1, y1):
    """Rect in local meters -> occupied cells."""
    for y in range(int(y0) + 100, int(y1) + 100):
        for x in range(int(x0) + 100, int(x1) + 100):
            cells[y, x] = True


uav = np.zeros((H, W), dtype=bool)
ped = np.zeros((H, W), dtype=bool)

# buildings (block both maps)
BUILDINGS = [
    ("badminton hall", 30, 24, 50, 36),     # entrance landmark at (40, 20)
    ("library", -62, 52, -32, 72),          # entrance at (-47, 46)
    ("teaching building", 48, -62, 78, -32),  # entrance at (63, -68)
]
for _, x0, y0, x1, y1 in BUILDINGS:
    fill_rect(uav, x0, y0, x1, y1)
    fill_rect(ped, x0, y0, x1, y1)

# pedestrian-only fences (pedestrians keep to walkways)
fill_rect(ped, -100, 10, 20, 12)    # long fence with a gap east of x=20
fill_rect(ped, -20, -40, 60, -38)

# uav-only no-fly strip (antenna field)
fill_rect(uav, -80, -20, -60, 0)


def pairs(cells):
    rows, cols = np.nonzero(cells)
    return [[int(r), int(c)] for r, c in zip(rows, cols)]


def b64(cells):
    import base64
    return base64.b64encode(np.packbits(cells.astype(np.uint8).ravel()).tobytes()).decode()


scenario = {
    "seed": 7,
    "reference_gps": {"lat": REF_LAT, "lon": REF_LON, "alt": 0.0},
    "z_cruise": 5.0,
    "obstacle_height": 12.0,
    "grids": [
        {"kind": "uav_exploration", "origin": [ORIGIN[0], ORIGIN[1]],
         "resolution": 1.0, "width": W, "height": H, "cells": b64(uav)},
        {"kind": "pedestrian_guidance", "origin": [ORIGIN[0], ORIGIN[1]],
         "resolution": 1.0, "width": W, "height": H, "cells": pairs(ped)},
    ],
    "landmarks": [
        {"id": "badminton-court", "name": "Badminton Court",
         "gps": to_gps(40.5, 20.5),
         "orientation_tag": "Badminton Hall South",
         "description": "Indoor badminton courts open to students in the sports hall.",
         "aliases": ["badminton hall", "sports hall"]},
        {"id": "library", "name": "Library",
         "gps": to_gps(-46.5, 46.5),
         "orientation_tag": "Library East",
         "description": "The main campus library with reading rooms and study areas.",
         "aliases": ["main library"]},
        {"id": "teaching-building", "name": "Teaching Building",
         "gps": to_gps(63.5, -67.5),
         "orientation_tag": "Teaching Building North",
         "description": "Lecture halls and classrooms for undergraduate courses.",
         "aliases": ["lecture building"]},
    ],
    "pedestrians": [
        {"id": "user", "position": [5.0, 2.0, 0.0], "is_user": True,
         "path": [], "speed": 0.0},
        {"id": "walker-1", "position": [-10.0, -6.0, 0.0], "is_user": False,
         "path": [[-10.0, -6.0, 0.0], [-10.0, -26.0, 0.0]], "speed": 1.0},
    ],
    "objects": [
        {"id": "bld-badminton", "class_tag": "building",
         "center": [40.0, 30.0, 6.0], "size": [20.0, 12.0, 12.0],
         "landmark_tags": ["Badminton Court", "badminton hall"]},
        {"id": "bld-library", "class_tag": "building",
         "center": [-47.0, 62.0, 6.0], "size": [30.0, 20.0, 12.0],
         "landmark_tags": ["Library"]},
        {"id": "bld-teaching", "class_tag": "building",
         "center": [63.0, -47.0, 6.0], "size": [30.0, 30.0, 12.0],
         "landmark_tags": ["Teaching Building"]},
        {"id": "tree-1", "class_tag": "tree",
         "center": [12.0, 6.0, 3.0], "size": [2.0, 2.0, 6.0],
         "landmark_tags": []},
    ],
    "uav_start": {"position": [0.0, 0.0, 0.0], "yaw": 0.0},
    "camera": {"fx": 40.0, "fy": 40.0, "cx": 32.0, "cy": 24.0,
               "width": 64, "height": 48, "pitch_deg": 25.0},
    "limits": {"v_max": 5.0, "a_max": 3.0, "yaw_rate_max": 1.5},
}

out = Path(__file__).parent / "campus.json"
out.write_text(json.dumps(scenario, indent=1))
print(f"wrote {out}")
