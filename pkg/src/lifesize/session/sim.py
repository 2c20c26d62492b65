"""Discrete-event simulation of a full-mesh session over in-memory links.

Every pair of peers shares one :class:`SimulatedLink`. All peers join at
t = 0; once every peer is Active, peer 0 requests the configured mode (if it
is not the default Avatar mode). Streaming starts on the next 100 ms
boundary after every peer runs that mode, then each peer emits one media
frame per interval for ``duration_s``. Every (sender, receiver) stream is
paced against the mode budget and metered.
"""

from __future__ import annotations

import csv
import heapq
import io
import itertools
import math
import random
from dataclasses import dataclass, field

from ..errors import InvalidInput, LifesizeError, UnsupportedScenario
from ..media import PixelFormat
from ..models import predict_placement
from .bandwidth import AVATAR_BUDGET_BPS, VIDEO_BUDGET_BPS, BandwidthMeter, TokenBucketPacer
from .link import SimulatedLink
from .state import (
    Inbound,
    JoinCmd,
    Outbound,
    Phase,
    SendMedia,
    SessionState,
    SetModeCmd,
    Tick,
    step,
)
from .transcript import TranscriptWriter
from .wire import Mode, PlacementUpdate, PoseFrame, StreamDecoder, VideoFrame, encode

VIDEO_OVERHEAD_BYTES = 14  # frame header 5 + video header 9
POSE_JOINTS = 2  # left and right wrist
DEFAULT_FPS = {Mode.AVATAR: 30.0, Mode.VIDEO_GRID: 15.0, Mode.VIDEO_AVATAR: 15.0}
DEFAULT_VIDEO_FRAME_BYTES = 2500
MAX_PEERS = 5


class SimulationConfigError(LifesizeError):
    pass


def mode_budget(mode: Mode) -> int:
    return AVATAR_BUDGET_BPS if mode is Mode.AVATAR else VIDEO_BUDGET_BPS


@dataclass(frozen=True)
class SimConfig:
    peers: int
    mode: Mode = Mode.AVATAR
    duration_s: float = 10.0
    seed: int = 0
    fps: float | None = None
    frame_bytes: int | None = None
    latency_ms: float = 20.0
    jitter_ms: float = 5.0
    fov_deg: float = 110.0
    window_s: float = 1.0

    def __post_init__(self) -> None:
        if self.peers < 2:
            raise SimulationConfigError(f"a session needs at least 2 peers, got {self.peers}")
        if self.peers > MAX_PEERS:
            raise UnsupportedScenario(
                f"layouts cover at most {MAX_PEERS - 1} remote users, got {self.peers} peers"
            )
        if not self.duration_s > 0:
            raise InvalidInput(f"duration must be positive, got {self.duration_s}")
        if self.fps is not None and not self.fps > 0:
            raise InvalidInput(f"fps must be positive, got {self.fps}")
        if self.frame_bytes is not None and self.frame_bytes <= VIDEO_OVERHEAD_BYTES:
            raise InvalidInput(f"frame bytes must exceed the {VIDEO_OVERHEAD_BYTES}-byte header")
        if self.latency_ms < 0 or self.jitter_ms < 0:
            raise InvalidInput("latency and jitter must be non-negative")

    @property
    def effective_fps(self) -> float:
        return self.fps if self.fps is not None else DEFAULT_FPS[self.mode]

    @property
    def effective_frame_bytes(self) -> int:
        if self.mode is Mode.AVATAR:
            return 5 + 5 + 12 * POSE_JOINTS
        return self.frame_bytes if self.frame_bytes is not None else DEFAULT_VIDEO_FRAME_BYTES


@dataclass
class StreamStats:
    stream_id: str
    src: int
    dst: int
    kind: str
    frame_bytes: int
    pacer: TokenBucketPacer
    sends: list[tuple[float, int]] = field(default_factory=list)
    peak_bits_per_s: float = 0.0


@dataclass
class SimResult:
    config: SimConfig
    states: dict[int, SessionState]
    streams: dict[str, StreamStats]
    stream_start_ms: float
    converged_ms: float | None
    transcript: TranscriptWriter
    total_peak_bits_per_s: float = 0.0

    @property
    def budget(self) -> int:
        return mode_budget(self.config.mode)

    def window_rates(self) -> list[tuple[str, float, float]]:
        """(stream_id, window_start_ms, bits_per_s) over consecutive windows."""
        w_ms = self.config.window_s * 1000.0
        n = math.ceil(self.config.duration_s / self.config.window_s - 1e-9)
        rows = []
        for sid in sorted(self.streams):
            st = self.streams[sid]
            for j in range(n):
                start = self.stream_start_ms + j * w_ms
                end = start + w_ms
                b = sum(size for t, size in st.sends if start <= t < end)
                rows.append((sid, start, 8.0 * b / self.config.window_s))
        return rows

    def rate_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["stream_id", "window_start_ms", "bits_per_s"])
        for sid, start, bps in self.window_rates():
            w.writerow([sid, f"{start:.3f}", f"{bps:.3f}"])
        return buf.getvalue()

    def stream_passes(self, st: StreamStats) -> bool:
        if self.config.mode is Mode.AVATAR:
            return st.peak_bits_per_s < self.budget
        slack = 8.0 * st.frame_bytes / self.config.window_s
        return st.peak_bits_per_s <= self.budget + slack

    def summary(self) -> dict:
        cfg = self.config
        n = cfg.peers
        streams = []
        for sid in sorted(self.streams):
            st = self.streams[sid]
            total = sum(size for _, size in st.sends)
            streams.append(
                {
                    "stream_id": sid,
                    "src": st.src,
                    "dst": st.dst,
                    "kind": st.kind,
                    "frame_bytes": st.frame_bytes,
                    "frames_offered": st.pacer.offered,
                    "frames_sent": st.pacer.sent,
                    "frames_dropped": st.pacer.dropped,
                    "starved": st.pacer.starved,
                    "mean_bits_per_s": 8.0 * total / cfg.duration_s,
                    "peak_bits_per_s": st.peak_bits_per_s,
                    "pass": self.stream_passes(st),
                }
            )
        peers = []
        for pid in sorted(self.states):
            s = self.states[pid]
            peers.append(
                {
                    "peer": pid,
                    "phase": s.phase.value,
                    "mode": s.mode.slug,
                    "known_peers": sorted(s.peers),
                    "placements_known": len(s.placements),
                    "violations": len(s.violations),
                }
            )
        converged = all(
            p["phase"] == "active" and p["placements_known"] == n - 1 and p["mode"] == cfg.mode.slug
            for p in peers
        )
        return {
            "peers": n,
            "mode": cfg.mode.slug,
            "duration_s": cfg.duration_s,
            "seed": cfg.seed,
            "fps": cfg.effective_fps,
            "frame_bytes": cfg.effective_frame_bytes,
            "latency_ms": cfg.latency_ms,
            "jitter_ms": cfg.jitter_ms,
            "budget_bits_per_s": self.budget,
            "window_s": cfg.window_s,
            "converged_ms": self.converged_ms,
            "stream_start_ms": self.stream_start_ms,
            "session_converged": converged,
            "total_peak_bits_per_s": self.total_peak_bits_per_s,
            "peer_states": peers,
            "streams": streams,
            "pass": converged and all(s["pass"] for s in streams),
        }


class MeshSimulation:
    def __init__(self, config: SimConfig):
        self.config = config
        cfg = config
        rng = random.Random(cfg.seed)
        ids = list(range(cfg.peers))
        pred = predict_placement(cfg.fov_deg, cfg.peers - 1)
        update = PlacementUpdate(pred.placement.radian_deg, pred.placement.radius_m, cfg.peers - 1)
        self.states = {
            i: SessionState.create(i, ids, f"peer-{i}", update) for i in ids
        }
        self.links: dict[tuple[int, int], SimulatedLink] = {}
        for a, b in itertools.combinations(ids, 2):
            self.links[(a, b)] = SimulatedLink(cfg.latency_ms, cfg.jitter_ms, rng.getrandbits(64))
        self.decoders = {(a, b): StreamDecoder() for a in ids for b in ids if a != b}
        self.media_rng = {i: random.Random(rng.getrandbits(64)) for i in ids}
        self.meter = BandwidthMeter(cfg.window_s)
        self.streams: dict[str, StreamStats] = {}
        self.transcript = TranscriptWriter()
        for s in self.states.values():
            self.transcript.config(s)
        self._heap: list = []
        self._seq = itertools.count()
        self.converged_ms: float | None = None
        self.stream_start_ms: float | None = None
        self._mode_requested = False
        self.total_peak = 0.0

    def _channel(self, src: int, dst: int):
        if src < dst:
            return self.links[(src, dst)].a_to_b
        return self.links[(dst, src)].b_to_a

    def _push(self, t: float, kind: str, *args) -> None:
        heapq.heappush(self._heap, (t, next(self._seq), kind, args))

    def _apply(self, peer: int, t: float, event) -> None:
        self.transcript.event(peer, t, event)
        self.states[peer], out = step(self.states[peer], event)
        self._send_all(peer, t, out)

    def _send_all(self, src: int, t: float, out: tuple[Outbound, ...]) -> None:
        for ob in out:
            data = encode(ob.msg)
            if isinstance(ob.msg, (PoseFrame, VideoFrame)):
                if not self._admit(src, ob.to, ob.msg, len(data), t):
                    continue
            for d in self._channel(src, ob.to).send(t, data):
                self._push(d.at_ms, "deliver", src, ob.to)

    def _admit(self, src: int, dst: int, msg, size: int, t: float) -> bool:
        kind = "pose" if isinstance(msg, PoseFrame) else "video"
        sid = f"p{src}->p{dst}:{kind}"
        st = self.streams.get(sid)
        if st is None:
            budget = mode_budget(self.config.mode)
            pacer = TokenBucketPacer(budget, size, self.config.window_s)
            st = self.streams[sid] = StreamStats(sid, src, dst, kind, size, pacer)
        if not st.pacer.offer(size, t / 1000.0):
            return False
        rate = self.meter.record(sid, size, t / 1000.0)
        st.peak_bits_per_s = max(st.peak_bits_per_s, rate)
        st.sends.append((t, size))
        self.total_peak = max(self.total_peak, self.meter.total_rate(t / 1000.0))
        return True

    def _make_frame(self, peer: int, t: float):
        rng = self.media_rng[peer]
        ts = int(t) & 0xFFFFFFFF
        mode = self.states[peer].mode
        if mode is Mode.AVATAR:
            joints = tuple(
                (side * 0.25 + rng.uniform(-0.05, 0.05), 1.0 + rng.uniform(-0.1, 0.1), rng.uniform(0.1, 0.4))
                for side in (-1.0, 1.0)
            )
            return PoseFrame(ts, joints)
        fmt = PixelFormat.RGB if mode is Mode.VIDEO_GRID else PixelFormat.RGBA_MATTED
        payload = rng.randbytes(self.config.effective_frame_bytes - VIDEO_OVERHEAD_BYTES)
        return VideoFrame(ts, 160, 120, fmt, payload)

    def _all(self, pred) -> bool:
        return all(pred(s) for s in self.states.values())

    def _check_progress(self, t: float) -> None:
        cfg = self.config
        if self.converged_ms is None and self._all(lambda s: s.phase is Phase.ACTIVE):
            self.converged_ms = t
            if cfg.mode is not Mode.AVATAR:
                self._mode_requested = True
                self._apply(0, t, SetModeCmd(cfg.mode))
        if (
            self.converged_ms is not None
            and self.stream_start_ms is None
            and self._all(lambda s: s.mode is cfg.mode and s.pending is None)
        ):
            start = math.floor(t / 100.0) * 100.0 + 100.0
            self.stream_start_ms = start
            interval = 1000.0 / cfg.effective_fps
            end = start + cfg.duration_s * 1000.0
            for peer in sorted(self.states):
                k = 0
                while start + k * interval < end - 1e-9:
                    self._push(start + k * interval, "frame", peer)
                    k += 1

    def run(self) -> SimResult:
        for peer in sorted(self.states):
            self._apply(peer, 0.0, JoinCmd())
        self._check_progress(0.0)
        while self._heap:
            t, _, kind, args = heapq.heappop(self._heap)
            if kind == "deliver":
                src, dst = args
                data = self._channel(src, dst).receive(t)
                if data:
                    for msg in self.decoders[(src, dst)].feed(data):
                        self._apply(dst, t, Inbound(src, msg))
            elif kind == "frame":
                (peer,) = args
                self._apply(peer, t, Tick(int(t)))
                self._apply(peer, t, SendMedia(self._make_frame(peer, t)))
            self._check_progress(t)
        if self.stream_start_ms is None:
            raise SimulationConfigError("session never converged; no media was streamed")
        return SimResult(
            self.config,
            dict(self.states),
            self.streams,
            self.stream_start_ms,
            self.converged_ms,
            self.transcript,
            self.total_peak,
        )


def simulate(config: SimConfig) -> SimResult:
    return MeshSimulation(config).run()
