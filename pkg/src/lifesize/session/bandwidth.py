"""Sliding-window bandwidth meter and token-bucket pacer."""

from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass, field

from ..errors import InvalidInput, NonMonotoneTime

AVATAR_BUDGET_BPS = 10_000
VIDEO_BUDGET_BPS = 300_000
# events this close to the window edge count as expired (k/fps timestamps round)
_EDGE_EPS_S = 1e-9


class BandwidthMeter:
    """Per-stream byte counts over a sliding window of ``window_s`` seconds.

    The rate of a stream at time ``now`` counts bytes recorded in
    ``(now - window_s, now]`` and is ``8 * bytes / window_s`` bits per second.
    """

    def __init__(self, window_s: float = 1.0):
        if window_s <= 0:
            raise InvalidInput(f"window must be positive, got {window_s}")
        self.window_s = window_s
        self._events: dict[str, deque[tuple[float, int]]] = defaultdict(deque)
        self._now = float("-inf")

    def _advance(self, now: float) -> None:
        if now < self._now:
            raise NonMonotoneTime(f"meter time went backwards: {now} < {self._now}")
        self._now = now
        horizon = now - self.window_s + _EDGE_EPS_S
        for q in self._events.values():
            while q and q[0][0] <= horizon:
                q.popleft()

    def record(self, stream_id: str, byte_count: int, now: float) -> float:
        if byte_count < 0:
            raise InvalidInput("byte count must be non-negative")
        self._advance(now)
        self._events[stream_id].append((now, byte_count))
        return self._rate_of(stream_id)

    def _rate_of(self, stream_id: str) -> float:
        q = self._events.get(stream_id)
        total = sum(b for _, b in q) if q else 0
        return 8.0 * total / self.window_s

    def rate(self, stream_id: str, now: float) -> float:
        self._advance(now)
        return self._rate_of(stream_id)

    def rates(self, now: float) -> dict[str, float]:
        self._advance(now)
        return {s: self._rate_of(s) for s in sorted(self._events)}

    def total_rate(self, now: float) -> float:
        self._advance(now)
        total = sum(b for q in self._events.values() for _, b in q)
        return 8.0 * total / self.window_s

    @property
    def streams(self) -> list[str]:
        return sorted(self._events)


def meter_record(meter: BandwidthMeter, stream_id: str, byte_count: int, now: float) -> float:
    return meter.record(stream_id, byte_count, now)


@dataclass
class TokenBucketPacer:
    """Admit-or-drop pacing against a bit-rate budget.

    The bucket holds at most ``capacity_bytes`` (one frame by default, so any
    window can exceed the budget by at most one frame) and starts full. A
    frame that does not fit is dropped immediately, never queued. A frame
    larger than one window's worth of budget, or than the bucket itself, can
    never be sent and is dropped as starvation.
    """

    budget_bits_per_s: float
    capacity_bytes: int
    window_s: float = 1.0
    tokens_bits: float = field(init=False)
    last_s: float | None = field(default=None, init=False)
    sent: int = field(default=0, init=False)
    dropped: int = field(default=0, init=False)
    starved: bool = field(default=False, init=False)

    _EPS_BITS = 1e-6

    def __post_init__(self) -> None:
        if self.budget_bits_per_s <= 0:
            raise InvalidInput(f"budget must be positive, got {self.budget_bits_per_s}")
        if self.capacity_bytes <= 0:
            raise InvalidInput("bucket capacity must be positive")
        self.tokens_bits = 8.0 * self.capacity_bytes

    def offer(self, size_bytes: int, now_s: float) -> bool:
        """True if the frame may be sent now; False if it is dropped."""
        if self.last_s is not None:
            if now_s < self.last_s:
                raise NonMonotoneTime(f"pacer time went backwards: {now_s} < {self.last_s}")
            self.tokens_bits = min(
                8.0 * self.capacity_bytes,
                self.tokens_bits + (now_s - self.last_s) * self.budget_bits_per_s,
            )
        self.last_s = now_s
        cost = 8.0 * size_bytes
        if cost > self.budget_bits_per_s * self.window_s or size_bytes > self.capacity_bytes:
            self.starved = True
            self.dropped += 1
            return False
        if cost > self.tokens_bits + self._EPS_BITS:
            self.dropped += 1
            return False
        self.tokens_bits -= cost
        self.sent += 1
        return True

    @property
    def offered(self) -> int:
        return self.sent + self.dropped


def pace(pacer: TokenBucketPacer, frames: list[tuple[float, int]]) -> list[bool]:
    """Send/drop decision for each (time_s, size_bytes) frame, in order."""
    return [pacer.offer(size, t) for t, size in frames]
