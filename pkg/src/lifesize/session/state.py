"""Symmetric full-mesh session state machine.

Each participant runs one :class:`SessionState`, fed one event at a time by
:func:`step`. States are immutable; ``step`` returns the successor and the
messages to send, addressed by peer id.

Joining: a peer announces itself with ``Join`` to every configured peer and
becomes Active once it has heard ``Join`` from all of them.

Mode changes: the initiator broadcasts ``ModeSet``; every receiver accepts it
and broadcasts ``ModeAck`` to all peers. A participant switches once it has
seen acceptance from every current member (the initiator's proposal counts as
its acceptance). Until then frames of both the old and the pending mode are
accepted. Competing proposals are settled in favour of the lower peer id.

Any inbound message that breaks these rules drops the sender with ``Close``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Union

from ..errors import ProtocolViolation
from ..media import PixelFormat
from .wire import (
    Close,
    CloseReason,
    Join,
    Leave,
    Message,
    Mode,
    ModeAck,
    ModeSet,
    PlacementUpdate,
    PoseFrame,
    VideoFrame,
)


class Phase(enum.Enum):
    IDLE = "idle"
    JOINING = "joining"
    ACTIVE = "active"
    CLOSED = "closed"


# local commands


@dataclass(frozen=True)
class JoinCmd:
    pass


@dataclass(frozen=True)
class SetModeCmd:
    mode: Mode


@dataclass(frozen=True)
class LeaveCmd:
    pass


@dataclass(frozen=True)
class Tick:
    now_ms: int


@dataclass(frozen=True)
class SendMedia:
    msg: Union[PoseFrame, VideoFrame]


@dataclass(frozen=True)
class Inbound:
    sender: int
    msg: Message


Event = Union[JoinCmd, SetModeCmd, LeaveCmd, Tick, SendMedia, Inbound]


@dataclass(frozen=True)
class Outbound:
    to: int
    msg: Message


@dataclass(frozen=True)
class PendingMode:
    mode: Mode
    initiator: int


def _fs(*items) -> frozenset:
    return frozenset(items)


@dataclass(frozen=True)
class SessionState:
    local_id: int
    configured: frozenset[int]
    display_name: str = ""
    placement: PlacementUpdate | None = None
    phase: Phase = Phase.IDLE
    mode: Mode = Mode.AVATAR
    joined: frozenset[int] = frozenset()
    departed: frozenset[int] = frozenset()
    pending: PendingMode | None = None
    # mode -> peers known to have accepted it
    accepted: tuple[tuple[Mode, frozenset[int]], ...] = ()
    placements: tuple[tuple[int, PlacementUpdate], ...] = ()
    frames_received: tuple[tuple[int, int], ...] = ()
    violations: tuple[tuple[int, str], ...] = ()
    now_ms: int = 0

    @classmethod
    def create(
        cls,
        local_id: int,
        peers,
        display_name: str = "",
        placement: PlacementUpdate | None = None,
    ) -> SessionState:
        configured = frozenset(int(p) for p in peers) - {local_id}
        return cls(local_id, configured, display_name or f"peer-{local_id}", placement)

    @property
    def members(self) -> frozenset[int]:
        """Remote peers still part of the session (not left or dropped)."""
        return self.configured - self.departed

    @property
    def peers(self) -> frozenset[int]:
        """Remote peers we have heard from and that are still members."""
        return self.joined & self.members

    def placement_of(self, peer: int) -> PlacementUpdate | None:
        return dict(self.placements).get(peer)

    def accepted_for(self, mode: Mode) -> frozenset[int]:
        return dict(self.accepted).get(mode, frozenset())

    def slots(self) -> tuple[int, ...]:
        """Remote peers in avatar-slot order (ascending id)."""
        return tuple(sorted(self.peers))

    def received_from(self, peer: int) -> int:
        return dict(self.frames_received).get(peer, 0)


def _set_item(pairs: tuple, key, value) -> tuple:
    d = dict(pairs)
    d[key] = value
    return tuple(sorted(d.items(), key=lambda kv: kv[0]))


def _del_item(pairs: tuple, key) -> tuple:
    return tuple(kv for kv in pairs if kv[0] != key)


def _broadcast(state: SessionState, msg: Message) -> list[Outbound]:
    return [Outbound(p, msg) for p in sorted(state.peers)]


def _maybe_activate(state: SessionState, out: list[Outbound]) -> SessionState:
    if state.phase is not Phase.JOINING or not state.members <= state.joined:
        return state
    state = replace(state, phase=Phase.ACTIVE)
    if state.placement is not None:
        out.extend(_broadcast(state, state.placement))
    return _maybe_commit(state)


def _maybe_commit(state: SessionState) -> SessionState:
    p = state.pending
    if p is None:
        return state
    have = state.accepted_for(p.mode) | {p.initiator, state.local_id}
    if not (state.members | {state.local_id}) <= have:
        return state
    return replace(
        state, mode=p.mode, pending=None, accepted=_del_item(state.accepted, p.mode)
    )


def _record_accept(state: SessionState, mode: Mode, peer: int) -> SessionState:
    return replace(
        state, accepted=_set_item(state.accepted, mode, state.accepted_for(mode) | {peer})
    )


def _remove_peer(state: SessionState, peer: int) -> SessionState:
    state = replace(
        state,
        departed=state.departed | {peer},
        placements=_del_item(state.placements, peer),
    )
    return state


def _drop(state: SessionState, peer: int, reason: str, out: list[Outbound]) -> SessionState:
    out.append(Outbound(peer, Close(peer, CloseReason.PROTOCOL_VIOLATION)))
    state = _remove_peer(state, peer)
    state = replace(state, violations=state.violations + ((peer, reason),))
    return _maybe_commit(_maybe_activate(state, out))


def _media_allowed(state: SessionState, msg) -> bool:
    modes = {state.mode}
    if state.pending is not None:
        modes.add(state.pending.mode)
    if isinstance(msg, PoseFrame):
        return Mode.AVATAR in modes
    if msg.pixel_format is PixelFormat.RGB:
        return Mode.VIDEO_GRID in modes
    return Mode.VIDEO_AVATAR in modes


def _on_inbound(state: SessionState, sender: int, msg: Message, out: list[Outbound]) -> SessionState:
    if sender in state.departed:
        # in flight before the peer left or was dropped
        return state
    if sender not in state.configured:
        out.append(Outbound(sender, Close(sender, CloseReason.UNKNOWN_PEER)))
        return replace(state, violations=state.violations + ((sender, "unknown peer"),))
    if state.phase is Phase.CLOSED:
        return state

    if isinstance(msg, Join):
        if msg.peer_id != sender:
            return _drop(state, sender, "join carries a foreign peer id", out)
        state = replace(state, joined=state.joined | {sender})
        return _maybe_activate(state, out)

    if isinstance(msg, (Leave, Close)):
        if isinstance(msg, Leave) and msg.peer_id != sender:
            return _drop(state, sender, "leave carries a foreign peer id", out)
        state = _remove_peer(state, sender)
        return _maybe_commit(_maybe_activate(state, out))

    # everything else needs a joined sender and a session in progress
    if state.phase is Phase.IDLE or sender not in state.joined:
        return _drop(state, sender, f"{type(msg).__name__} before join", out)

    if isinstance(msg, ModeSet):
        p = state.pending
        if p is None or p.mode == msg.mode or sender < p.initiator:
            if p is None or p.mode != msg.mode:
                state = replace(state, pending=PendingMode(msg.mode, sender))
                out.extend(_broadcast(state, ModeAck(msg.mode)))
            state = _record_accept(state, msg.mode, sender)
        return _maybe_commit(state)

    if isinstance(msg, ModeAck):
        return _maybe_commit(_record_accept(state, msg.mode, sender))

    if isinstance(msg, PlacementUpdate):
        return replace(state, placements=_set_item(state.placements, sender, msg))

    if isinstance(msg, (PoseFrame, VideoFrame)):
        if not _media_allowed(state, msg):
            return _drop(state, sender, f"{type(msg).__name__} not allowed in {state.mode.slug}", out)
        return replace(
            state,
            frames_received=_set_item(
                state.frames_received, sender, state.received_from(sender) + 1
            ),
        )

    return _drop(state, sender, f"unexpected {type(msg).__name__}", out)


def step(state: SessionState, event: Event) -> tuple[SessionState, tuple[Outbound, ...]]:
    """Apply one event. Deterministic: equal inputs give equal outputs.

    Local commands issued in the wrong phase raise :class:`ProtocolViolation`;
    misbehaving remote peers never raise, they are dropped instead.
    """
    out: list[Outbound] = []
    if isinstance(event, Inbound):
        state = _on_inbound(state, event.sender, event.msg, out)
    elif isinstance(event, Tick):
        if event.now_ms < state.now_ms:
            raise ProtocolViolation(f"clock went backwards: {event.now_ms} < {state.now_ms}")
        state = replace(state, now_ms=event.now_ms)
    elif isinstance(event, JoinCmd):
        if state.phase is not Phase.IDLE:
            raise ProtocolViolation(f"join issued in phase {state.phase.value}")
        state = replace(state, phase=Phase.JOINING)
        hello = Join(state.local_id, state.display_name)
        out.extend(Outbound(p, hello) for p in sorted(state.members))
        state = _maybe_activate(state, out)
    elif isinstance(event, SetModeCmd):
        if state.phase is not Phase.ACTIVE:
            raise ProtocolViolation(f"mode change requires an active session, phase is {state.phase.value}")
        if state.pending is not None:
            raise ProtocolViolation(f"mode change to {state.pending.mode.slug} already pending")
        mode = Mode(event.mode)
        state = replace(state, pending=PendingMode(mode, state.local_id))
        out.extend(_broadcast(state, ModeSet(mode)))
        state = _maybe_commit(state)
    elif isinstance(event, LeaveCmd):
        if state.phase is Phase.CLOSED:
            raise ProtocolViolation("session already closed")
        out.extend(Outbound(p, Leave(state.local_id)) for p in sorted(state.members))
        state = replace(state, phase=Phase.CLOSED, pending=None)
    elif isinstance(event, SendMedia):
        if state.phase is not Phase.ACTIVE:
            raise ProtocolViolation(f"media sent in phase {state.phase.value}")
        msg = event.msg
        if isinstance(msg, PoseFrame):
            ok = state.mode is Mode.AVATAR
        else:
            want = {Mode.VIDEO_GRID: PixelFormat.RGB, Mode.VIDEO_AVATAR: PixelFormat.RGBA_MATTED}
            ok = want.get(state.mode) is msg.pixel_format
        if not ok:
            raise ProtocolViolation(f"{type(msg).__name__} does not match {state.mode.slug} mode")
        out.extend(_broadcast(state, msg))
    else:
        raise TypeError(f"unknown event {event!r}")
    return state, tuple(out)
