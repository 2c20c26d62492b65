"""In-memory reliable, ordered byte-stream link with seeded latency jitter.

The link never loses, duplicates or reorders bytes. Each ``send`` is cut into
seeded random segments; a segment is delivered at
``max(previous delivery, send time + latency + U(0, jitter))`` so delivery
times never decrease. Time is virtual (milliseconds) and supplied by the
caller.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field

from ..errors import InvalidInput


@dataclass(frozen=True)
class Delivery:
    at_ms: float
    data: bytes


class Channel:
    """One direction of a link: a single writer, a single reader."""

    def __init__(self, latency_ms: float, jitter_ms: float, rng: random.Random, max_segment: int = 1400):
        self.latency_ms = latency_ms
        self.jitter_ms = jitter_ms
        self.max_segment = max_segment
        self._rng = rng
        self._queue: deque[Delivery] = deque()
        self._last_at = float("-inf")
        self._last_sent = float("-inf")
        self.bytes_sent = 0
        self.bytes_delivered = 0

    def send(self, now_ms: float, data: bytes) -> list[Delivery]:
        if now_ms < self._last_sent:
            raise InvalidInput(f"send time went backwards: {now_ms} < {self._last_sent}")
        self._last_sent = now_ms
        scheduled = []
        off = 0
        while off < len(data):
            size = self._rng.randint(1, self.max_segment)
            chunk = bytes(data[off : off + size])
            off += len(chunk)
            jitter = self._rng.uniform(0.0, self.jitter_ms) if self.jitter_ms > 0 else 0.0
            at = max(self._last_at, now_ms + self.latency_ms + jitter)
            self._last_at = at
            d = Delivery(at, chunk)
            self._queue.append(d)
            scheduled.append(d)
        self.bytes_sent += len(data)
        return scheduled

    def receive(self, now_ms: float) -> bytes:
        """All bytes whose delivery time is <= ``now_ms``, in order."""
        parts = []
        while self._queue and self._queue[0].at_ms <= now_ms:
            parts.append(self._queue.popleft().data)
        data = b"".join(parts)
        self.bytes_delivered += len(data)
        return data

    def next_delivery(self) -> float | None:
        return self._queue[0].at_ms if self._queue else None

    def drain(self) -> bytes:
        return self.receive(float("inf"))

    @property
    def in_flight(self) -> int:
        return self.bytes_sent - self.bytes_delivered


@dataclass
class SimulatedLink:
    """A duplex link between endpoints ``a`` and ``b``."""

    latency_ms: float = 0.0
    jitter_ms: float = 0.0
    seed: int = 0
    a_to_b: Channel = field(init=False)
    b_to_a: Channel = field(init=False)

    def __post_init__(self) -> None:
        if self.latency_ms < 0 or self.jitter_ms < 0:
            raise InvalidInput("latency and jitter must be non-negative")
        rng = random.Random(self.seed)
        # independent deterministic streams per direction
        self.a_to_b = Channel(self.latency_ms, self.jitter_ms, random.Random(rng.getrandbits(64)))
        self.b_to_a = Channel(self.latency_ms, self.jitter_ms, random.Random(rng.getrandbits(64)))

    def channel(self, forward: bool) -> Channel:
        return self.a_to_b if forward else self.b_to_a


def simulated_link(latency_ms: float = 0.0, jitter_ms: float = 0.0, seed: int = 0) -> SimulatedLink:
    return SimulatedLink(latency_ms, jitter_ms, seed)
