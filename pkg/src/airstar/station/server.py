"""HTTP/WebSocket service layer.

Three apps share the same wire protocol:
  * create_app        — live combined run (onboard + station in one process,
                        ticked at 10 Hz wall clock), clients on /ws.
  * create_station_app — station tier only; the onboard tier connects to
                        /link with run_onboard_client.
  * create_replay_app — re-emits a recorded run at its original cadence.
"""
from __future__ import annotations

import asyncio
import contextlib
import json
from typing import Optional

from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from ..world.sim import TICK_DT
from .combined import CombinedRunner

CLIENT_QUEUE_LIMIT = 512


class AsyncClient:
    """Adapts the station's synchronous client fan-out to an asyncio queue."""

    def __init__(self):
        self.queue: asyncio.Queue[str] = asyncio.Queue()

    def send(self, line: str) -> None:
        # last-value-wins for slow consumers: drop the oldest line
        if self.queue.qsize() >= CLIENT_QUEUE_LIMIT:
            with contextlib.suppress(asyncio.QueueEmpty):
                self.queue.get_nowait()
        self.queue.put_nowait(line)


async def _pump_client(ws: WebSocket, client: AsyncClient,
                       on_line, unregister) -> None:
    """Full-duplex relay between one websocket and the station."""
    await ws.accept()

    async def writer():
        while True:
            await ws.send_text(await client.queue.get())

    task = asyncio.create_task(writer())
    try:
        while True:
            on_line(await ws.receive_text())
    except WebSocketDisconnect:
        pass
    finally:
        task.cancel()
        unregister()


def _task_lifespan(coro_factory):
    @contextlib.asynccontextmanager
    async def lifespan(app: FastAPI):
        task = asyncio.create_task(coro_factory())
        try:
            yield
        finally:
            task.cancel()
    return lifespan


def create_app(runner: CombinedRunner, scenario_doc: Optional[dict] = None) -> FastAPI:
    """Live combined-mode service ticking at 10 Hz wall clock."""

    async def tick_loop():
        while True:
            runner.step_tick()
            await asyncio.sleep(TICK_DT)

    app = FastAPI(lifespan=_task_lifespan(tick_loop))

    @app.get("/scenario")
    def scenario():
        return scenario_doc or {}

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        client = AsyncClient()
        runner.station.add_client(client)
        await _pump_client(ws, client, runner.client_send,
                           lambda: runner.station.remove_client(client))

    return app


class SocketEndpoint:
    """LinkEndpoint-compatible adapter over a websocket relay task."""

    def __init__(self):
        self.connected = False
        self.inbox: list[str] = []
        self.outbox: asyncio.Queue[str] = asyncio.Queue()

    def send(self, line: str) -> None:
        if self.connected:
            self.outbox.put_nowait(line)

    def poll(self, now_tick: int) -> list[str]:
        out, self.inbox = self.inbox, []
        return out


async def _pump_link(ws_send_text, ws_receive_text, endpoint: SocketEndpoint) -> None:
    endpoint.connected = True

    async def writer():
        while True:
            await ws_send_text(await endpoint.outbox.get())

    task = asyncio.create_task(writer())
    try:
        while True:
            endpoint.inbox.append(await ws_receive_text())
    finally:
        endpoint.connected = False
        task.cancel()


def create_station_app(station, scenario_doc: Optional[dict] = None) -> FastAPI:
    """Station tier only; the onboard process dials in on /link.

    `station` is a StationAgent whose link is a SocketEndpoint; its poll loop
    runs on a wall-clock timer and takes its tick from incoming telemetry.
    """
    async def poll_loop():
        while True:
            station.poll()
            await asyncio.sleep(TICK_DT)

    app = FastAPI(lifespan=_task_lifespan(poll_loop))

    @app.get("/scenario")
    def scenario():
        return scenario_doc or {}

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        client = AsyncClient()
        station.add_client(client)
        await _pump_client(ws, client, station.handle_client_line,
                           lambda: station.remove_client(client))

    @app.websocket("/link")
    async def link_endpoint(ws: WebSocket):
        await ws.accept()
        endpoint: SocketEndpoint = station.link
        with contextlib.suppress(WebSocketDisconnect):
            await _pump_link(ws.send_text, ws.receive_text, endpoint)

    return app


async def run_onboard_client(onboard, url: str) -> None:
    """Onboard tier main loop: dial the station's /link and tick at 10 Hz.

    `onboard` is an OnboardAgent whose link is a SocketEndpoint. The tick
    loop never blocks on the socket; link loss triggers the hard stop.
    """
    import websockets

    endpoint: SocketEndpoint = onboard.link

    async def relay():
        while True:
            try:
                async with websockets.connect(url) as ws:
                    await _pump_link(ws.send, ws.recv, endpoint)
            except OSError:
                pass
            endpoint.connected = False
            await asyncio.sleep(1.0)

    relay_task = asyncio.create_task(relay())
    try:
        while True:
            onboard.tick()
            await asyncio.sleep(TICK_DT)
    finally:
        relay_task.cancel()


def create_replay_app(record_lines: list[str],
                      scenario_doc: Optional[dict] = None,
                      speed: float = 1.0) -> FastAPI:
    """Serves a recorded run back to clients at its original tick cadence.

    Station->client messages are re-emitted with their recorded tick spacing;
    events carry replay=true so the console can label the session.
    """
    records = []
    for i, line in enumerate(record_lines, start=1):
        try:
            rec = json.loads(line)
            tick, direction, msg = rec["tick"], rec["dir"], rec["msg"]
        except (json.JSONDecodeError, TypeError, KeyError) as e:
            raise ValueError(f"record line {i}: {e}") from e
        records.append((int(tick), direction, msg))

    app = FastAPI()

    @app.get("/scenario")
    def scenario():
        return scenario_doc or {}

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        await ws.accept()
        with contextlib.suppress(WebSocketDisconnect):
            last_tick = records[0][0] if records else 0
            for tick, direction, msg in records:
                if tick > last_tick:
                    await asyncio.sleep((tick - last_tick) * TICK_DT / speed)
                    last_tick = tick
                if direction != "s2c":
                    continue
                if msg.get("type") == "event":
                    msg = dict(msg, replay=True)
                await ws.send_text(json.dumps(msg, sort_keys=True,
                                              separators=(",", ":")))

    return app
