"""Runtime configuration: gains, budgets, backend URLs, link latency."""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Optional

ENV_VAR = "AIRSTAR_CONFIG"


@dataclass
class AirstarConfig:
    # control gains
    k_yaw: float = 1.0
    k_pos: float = 0.8
    goto_gain: float = 1.0
    lost_threshold: int = 20

    # per-step tick budgets
    budgets: dict = field(default_factory=lambda: {
        "geo_navigate": 1200,
        "object_navigate": 600,
        "search_qa": 300,
        "frame_human": 200,
        "gesture_session": 300,
        "announce_arrival": 1,
        "return_to_user": 1200,
        "track": 300,
    })

    # mission parameters
    max_attempts: int = 3
    standoff: float = 2.0
    track_standoff: float = 5.0
    return_offset: float = 3.0
    arrival_tolerance: float = 1.5
    object_arrival_tolerance: float = 1.0
    c_min_uav: float = 1.0
    c_min_pedestrian: float = 0.5

    # remote backends; None selects the deterministic mock
    planner_url: Optional[str] = None
    grounding_url: Optional[str] = None
    qa_url: Optional[str] = None
    backend_timeout: float = 10.0

    # injected link latency (ticks), standing in for radio transport
    latency_mean_ticks: int = 0
    latency_jitter_ticks: int = 0

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "AirstarConfig":
        cfg = cls()
        for key, value in d.items():
            if not hasattr(cfg, key):
                raise ValueError(f"unknown config key '{key}'")
            if key == "budgets":
                cfg.budgets.update(value)
            else:
                setattr(cfg, key, value)
        return cfg

    @classmethod
    def load(cls, path: Optional[str | Path] = None) -> "AirstarConfig":
        """Load from an explicit path, else $AIRSTAR_CONFIG, else defaults."""
        path = path or os.environ.get(ENV_VAR)
        if not path:
            return cls()
        return cls.from_dict(json.loads(Path(path).read_text()))
