"""Headless entry points: run scripted missions, replay records, eval suites."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .config import AirstarConfig
from .errors import AirstarError, DecodeError
from .geonav import distance_transform
from .station.combined import CombinedRunner
from .station.protocol import decode
from .world.types import GridKind


def _load_config(path: str | None) -> AirstarConfig:
    return AirstarConfig.load(path)


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------

def cmd_run(args) -> int:
    try:
        cfg = _load_config(args.config)
        runner = CombinedRunner(args.scenario, config=cfg, seed=args.seed,
                                record_path=args.record)
    except (AirstarError, OSError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    ok = True
    for mission in args.mission or []:
        success = runner.run_mission(mission)
        print(f"mission {mission!r}: {'ok' if success else 'FAILED'}")
        ok = ok and success
    if not args.mission:
        runner.wait_for_standby()
    runner.save_record()
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# replay
# ---------------------------------------------------------------------------

def _read_record(path: str) -> list[str]:
    return Path(path).read_text().splitlines()


def check_record(lines: list[str]) -> int:
    """Decode every wire message; raises DecodeError with its line number."""
    count = 0
    for i, line in enumerate(lines, start=1):
        try:
            rec = json.loads(line)
            decode(json.dumps(rec["msg"]))
        except (json.JSONDecodeError, TypeError, KeyError, DecodeError) as e:
            raise DecodeError(f"record line {i}: {e}") from e
        count += 1
    return count


def cmd_replay(args) -> int:
    try:
        lines = _read_record(args.record)
        n = check_record(lines)
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except DecodeError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    if not args.serve:
        print(f"{n} messages ok")
        return 0
    from .station.server import create_replay_app
    scenario_doc = None
    if args.scenario:
        scenario_doc = json.loads(Path(args.scenario).read_text())
    app = create_replay_app(lines, scenario_doc, speed=args.speed)
    import uvicorn
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


# ---------------------------------------------------------------------------
# eval
# ---------------------------------------------------------------------------

def _suite_path(name: str) -> Path:
    p = Path(name)
    if p.exists():
        return p
    candidate = Path("scenarios/suites") / f"{name}.json"
    if candidate.exists():
        return candidate
    raise FileNotFoundError(f"suite '{name}' not found")


def run_suite(suite_path: Path, config: AirstarConfig) -> dict:
    suite = json.loads(suite_path.read_text())
    scenario = (suite_path.parent / suite["scenario"]).resolve()
    results = []
    for mission in suite.get("missions", []):
        runner = CombinedRunner(str(scenario), config=config,
                                seed=suite.get("seed"))
        runner.wait_for_standby()
        start_tick = runner.tick
        success = runner.run_mission(mission)

        positions = []
        plans = 0
        for line in runner.record_lines:
            rec = json.loads(line)
            if rec["tick"] < start_tick:
                continue
            msg = rec["msg"]
            if msg["type"] == "telemetry":
                positions.append(msg["pose"]["position"])
            elif msg["type"] == "plan":
                plans += 1
        path_length = 0.0
        if len(positions) > 1:
            pts = np.asarray(positions)
            path_length = float(np.sum(np.linalg.norm(np.diff(pts, axis=0), axis=1)))
        grid = runner.world.grid(GridKind.uav_exploration)
        min_clearance = float("inf")
        if grid is not None and positions:
            dfield = distance_transform(grid) * grid.resolution
            for p in positions:
                r, c = grid.point_to_cell(p[0], p[1])
                if grid.in_bounds(r, c):
                    min_clearance = min(min_clearance, float(dfield[r, c]))
        results.append({
            "mission": mission,
            "success": success,
            "ticks": runner.tick - start_tick,
            "path_length_m": round(path_length, 2),
            "min_clearance_m": None if min_clearance == float("inf")
            else round(min_clearance, 2),
            "replans_used": max(0, plans - 1),
        })
    n = len(results)
    return {
        "suite": suite_path.stem,
        "missions": results,
        "success_rate": (sum(r["success"] for r in results) / n) if n else None,
    }


def cmd_eval(args) -> int:
    try:
        suite_path = _suite_path(args.suite)
        report = run_suite(suite_path, _load_config(args.config))
    except (AirstarError, OSError, json.JSONDecodeError, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    if args.out:
        Path(args.out).write_text(json.dumps(report, indent=2))
    print(json.dumps(report, indent=2))
    print()
    header = f"{'mission':<48} {'ok':<3} {'ticks':>6} {'path_m':>8} {'clear_m':>8} {'replans':>7}"
    print(header)
    print("-" * len(header))
    for r in report["missions"]:
        clear = "-" if r["min_clearance_m"] is None else f"{r['min_clearance_m']:.2f}"
        print(f"{r['mission']:<48} {'y' if r['success'] else 'n':<3} "
              f"{r['ticks']:>6} {r['path_length_m']:>8.2f} {clear:>8} "
              f"{r['replans_used']:>7}")
    ok = all(r["success"] for r in report["missions"])
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# serve
# ---------------------------------------------------------------------------

def cmd_serve(args) -> int:
    import uvicorn
    try:
        cfg = _load_config(args.config)
        scenario_doc = json.loads(Path(args.scenario).read_text())
    except (OSError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    if args.mode == "combined":
        from .station.server import create_app
        runner = CombinedRunner(scenario_doc, config=cfg, seed=args.seed)
        app = create_app(runner, scenario_doc)
    else:
        from .station.server import SocketEndpoint, create_station_app
        from .station.station import StationAgent, build_knowledge_base
        from .world.scenario import load_scenario_dict
        world = load_scenario_dict(scenario_doc)
        kb = build_knowledge_base(world, journal_path=args.journal)
        station = StationAgent(world, SocketEndpoint(), cfg, kb=kb)
        app = create_station_app(station, scenario_doc)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def cmd_onboard(args) -> int:
    import asyncio
    try:
        cfg = _load_config(args.config)
        scenario_doc = json.loads(Path(args.scenario).read_text())
    except (OSError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    from .station.onboard import OnboardAgent
    from .station.server import SocketEndpoint, run_onboard_client
    from .world.scenario import load_scenario_dict
    world = load_scenario_dict(scenario_doc)
    onboard = OnboardAgent(world, SocketEndpoint(), cfg)
    asyncio.run(run_onboard_client(onboard, args.url))
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="airstar",
                                     description="UAV agent: run, replay, eval, serve")
    parser.add_argument("--config", help="JSON config file path")
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("run", help="run scripted missions in combined mode")
    p.add_argument("--scenario", required=True)
    p.add_argument("--mission", action="append", help="mission text (repeatable)")
    p.add_argument("--seed", type=int)
    p.add_argument("--record", help="write wire-message record (NDJSON)")
    p.add_argument("--headless", action="store_true", default=True)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("replay", help="validate or serve a recorded run")
    p.add_argument("--record", required=True)
    p.add_argument("--serve", action="store_true")
    p.add_argument("--scenario", help="scenario JSON for /scenario during --serve")
    p.add_argument("--speed", type=float, default=1.0)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("eval", help="run an acceptance suite and report metrics")
    p.add_argument("--suite", required=True, help="suite name or path")
    p.add_argument("--out", help="write JSON report to file")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("serve", help="serve a live session over HTTP/WebSocket")
    p.add_argument("--scenario", required=True)
    p.add_argument("--mode", choices=["combined", "station"], default="combined")
    p.add_argument("--seed", type=int)
    p.add_argument("--journal", help="knowledge journal path (station mode)")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("onboard", help="run the onboard tier against a station")
    p.add_argument("--scenario", required=True)
    p.add_argument("--url", default="ws://127.0.0.1:8000/link")
    p.set_defaults(func=cmd_onboard)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
