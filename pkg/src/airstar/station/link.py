"""In-memory message link with deterministic injected latency.

Stands in for the radio transport between tiers; both sides exchange
encoded wire lines. Delivery is tick-driven so combined-mode runs stay
bit-reproducible.
"""
from __future__ import annotations

import heapq
from typing import Optional

import numpy as np


class LinkEndpoint:
    def __init__(self, link: "InMemoryLink", side: str):
        self._link = link
        self._side = side

    @property
    def connected(self) -> bool:
        return self._link.connected

    def send(self, line: str) -> None:
        self._link.send(self._side, line)

    def poll(self, now_tick: int) -> list[str]:
        return self._link.poll(self._side, now_tick)


class InMemoryLink:
    """Bidirectional queue pair; messages arrive `latency` ticks after send."""

    def __init__(self, latency_mean_ticks: int = 0, latency_jitter_ticks: int = 0,
                 seed: int = 0):
        self.latency_mean = latency_mean_ticks
        self.latency_jitter = latency_jitter_ticks
        self.rng = np.random.default_rng(seed)
        self.connected = True
        self._queues = {"a": [], "b": []}   # heaps of (due_tick, seq, line)
        self._seq = 0
        self._now = 0

    def endpoint_a(self) -> LinkEndpoint:
        return LinkEndpoint(self, "a")

    def endpoint_b(self) -> LinkEndpoint:
        return LinkEndpoint(self, "b")

    def set_tick(self, tick: int) -> None:
        self._now = tick

    def _latency(self) -> int:
        lat = self.latency_mean
        if self.latency_jitter > 0:
            lat += int(self.rng.integers(0, self.latency_jitter + 1))
        return max(0, lat)

    def send(self, from_side: str, line: str) -> None:
        if not self.connected:
            return
        to_side = "b" if from_side == "a" else "a"
        due = self._now + self._latency()
        self._seq += 1
        heapq.heappush(self._queues[to_side], (due, self._seq, line))

    def poll(self, side: str, now_tick: int) -> list[str]:
        self._now = max(self._now, now_tick)
        if not self.connected:
            return []
        out = []
        q = self._queues[side]
        while q and q[0][0] <= now_tick:
            out.append(heapq.heappop(q)[2])
        return out

    def drop(self) -> None:
        """Simulate link loss; queued messages are discarded."""
        self.connected = False
        self._queues = {"a": [], "b": []}

    def restore(self) -> None:
        self.connected = True
