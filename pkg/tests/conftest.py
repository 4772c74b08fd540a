import json
from pathlib import Path

import numpy as np
import pytest

from airstar.world.scenario import load_scenario
from airstar.world.types import GridKind, OccupancyGrid

SCENARIO = Path(__file__).parent.parent / "scenarios" / "campus.json"


@pytest.fixture(scope="session")
def campus_path() -> Path:
    return SCENARIO


@pytest.fixture(scope="session")
def campus_doc() -> dict:
    return json.loads(SCENARIO.read_text())


@pytest.fixture
def world():
    return load_scenario(SCENARIO)


def make_grid(cells, origin=(0.0, 0.0), resolution=1.0,
              kind=GridKind.uav_exploration) -> OccupancyGrid:
    cells = np.asarray(cells, dtype=bool)
    return OccupancyGrid(kind=kind, origin=np.asarray(origin, dtype=float),
                         resolution=resolution, width=cells.shape[1],
                         height=cells.shape[0], cells=cells)


def empty_grid(height=30, width=30, **kw) -> OccupancyGrid:
    return make_grid(np.zeros((height, width), dtype=bool), **kw)
