from __future__ import annotations

from collections import deque

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lifesize.errors import ProtocolViolation
from lifesize.media import PixelFormat
from lifesize.session.state import (
    Inbound,
    JoinCmd,
    LeaveCmd,
    Phase,
    SendMedia,
    SessionState,
    SetModeCmd,
    Tick,
    step,
)
from lifesize.session.wire import (
    Close,
    Join,
    Mode,
    ModeAck,
    ModeSet,
    PlacementUpdate,
    PoseFrame,
    VideoFrame,
)

POSE = PoseFrame(0, ((0.0, 1.0, 0.2), (0.1, 1.0, 0.2)))
RGBA = VideoFrame(0, 2, 2, PixelFormat.RGBA_MATTED, b"\x00" * 16)
RGB = VideoFrame(0, 2, 2, PixelFormat.RGB, b"\x00" * 12)


class Mesh:
    """Instant FIFO delivery between in-process state machines."""

    def __init__(self, n: int, placements: bool = True):
        ids = list(range(n))
        self.states = {
            i: SessionState.create(i, ids, placement=PlacementUpdate(40.0, 1.1, n - 1) if placements else None)
            for i in ids
        }
        self.queue: deque = deque()
        self.log: list = []

    def apply(self, peer, event):
        self.states[peer], out = step(self.states[peer], event)
        self.log.append((peer, event, out))
        for ob in out:
            self.queue.append((peer, ob.to, ob.msg))

    def pump(self, limit: int = 10_000):
        while self.queue and limit:
            src, dst, msg = self.queue.popleft()
            if dst in self.states:
                self.apply(dst, Inbound(src, msg))
            limit -= 1

    def join_all(self):
        for i in self.states:
            self.apply(i, JoinCmd())
        self.pump()


def test_three_peer_join():
    mesh = Mesh(3)
    mesh.join_all()
    for i, s in mesh.states.items():
        assert s.phase is Phase.ACTIVE
        assert len(s.peers) == 2 and i not in s.peers
        assert len(s.placements) == 2
        assert s.slots() == tuple(sorted(set(range(3)) - {i}))


def test_active_only_after_every_join():
    s = SessionState.create(0, [0, 1, 2])
    s, out = step(s, JoinCmd())
    assert s.phase is Phase.JOINING
    assert [o.to for o in out] == [1, 2] and all(isinstance(o.msg, Join) for o in out)
    s, _ = step(s, Inbound(1, Join(1)))
    assert s.phase is Phase.JOINING
    s, _ = step(s, Inbound(2, Join(2)))
    assert s.phase is Phase.ACTIVE


def test_mode_change_needs_all_acks():
    mesh = Mesh(3)
    mesh.join_all()
    mesh.apply(0, SetModeCmd(Mode.VIDEO_AVATAR))
    # deliver only the proposals; acks stay queued
    proposals = [q for q in mesh.queue if isinstance(q[2], ModeSet)]
    mesh.queue = deque(q for q in mesh.queue if not isinstance(q[2], ModeSet))
    assert mesh.states[0].mode is Mode.AVATAR and mesh.states[0].pending is not None
    # old-mode frames are still welcome while the switch is pending
    mesh.apply(0, Inbound(1, POSE))
    assert mesh.states[0].received_from(1) == 1
    for src, dst, msg in proposals:
        mesh.apply(dst, Inbound(src, msg))
    assert mesh.states[0].mode is Mode.AVATAR
    mesh.pump()
    for s in mesh.states.values():
        assert s.mode is Mode.VIDEO_AVATAR and s.pending is None
        assert not s.violations


def test_initiator_commits_only_after_second_ack():
    s = SessionState.create(0, [0, 1, 2])
    s, _ = step(s, JoinCmd())
    s, _ = step(s, Inbound(1, Join(1)))
    s, _ = step(s, Inbound(2, Join(2)))
    s, out = step(s, SetModeCmd(Mode.VIDEO_AVATAR))
    assert {o.to for o in out} == {1, 2}
    s, _ = step(s, Inbound(1, ModeAck(Mode.VIDEO_AVATAR)))
    assert s.mode is Mode.AVATAR
    s, _ = step(s, Inbound(1, RGBA))  # new-mode frame, pending
    s, _ = step(s, Inbound(2, POSE))  # old-mode frame, pending
    assert not s.violations
    s, _ = step(s, Inbound(2, ModeAck(Mode.VIDEO_AVATAR)))
    assert s.mode is Mode.VIDEO_AVATAR
    # after the switch the old mode is a violation
    s, out = step(s, Inbound(2, POSE))
    assert 2 not in s.members and isinstance(out[0].msg, Close)


def test_conflicting_proposals_lower_id_wins():
    mesh = Mesh(3)
    mesh.join_all()
    mesh.apply(2, SetModeCmd(Mode.VIDEO_GRID))
    mesh.apply(1, SetModeCmd(Mode.VIDEO_AVATAR))
    mesh.pump()
    assert {s.mode for s in mesh.states.values()} == {Mode.VIDEO_AVATAR}
    assert all(s.pending is None for s in mesh.states.values())


def test_pose_in_idle_is_violation():
    s = SessionState.create(0, [0, 1])
    with pytest.raises(ProtocolViolation):
        step(s, SendMedia(POSE))
    s2, out = step(s, Inbound(1, POSE))
    assert out and isinstance(out[0].msg, Close) and out[0].to == 1
    assert 1 not in s2.members and s2.violations


def test_local_command_guards():
    s = SessionState.create(0, [0, 1])
    with pytest.raises(ProtocolViolation):
        step(s, SetModeCmd(Mode.VIDEO_GRID))
    s, _ = step(s, JoinCmd())
    with pytest.raises(ProtocolViolation):
        step(s, JoinCmd())
    s, _ = step(s, Inbound(1, Join(1)))
    with pytest.raises(ProtocolViolation):
        step(s, SendMedia(RGB))
    s, _ = step(s, Tick(100))
    with pytest.raises(ProtocolViolation):
        step(s, Tick(50))
    s, _ = step(s, LeaveCmd())
    with pytest.raises(ProtocolViolation):
        step(s, LeaveCmd())


def test_leave_frees_slot():
    mesh = Mesh(3)
    mesh.join_all()
    mesh.apply(1, LeaveCmd())
    mesh.pump()
    assert mesh.states[1].phase is Phase.CLOSED
    for i in (0, 2):
        s = mesh.states[i]
        assert 1 not in s.peers and s.placement_of(1) is None
        assert s.slots() == (2 - i,)


def test_unknown_peer_gets_close():
    s = SessionState.create(0, [0, 1])
    s, out = step(s, Inbound(9, Join(9)))
    assert out[0].to == 9 and isinstance(out[0].msg, Close)
    assert s.members == {1}


def test_foreign_join_id_dropped():
    s = SessionState.create(0, [0, 1, 2])
    s, _ = step(s, JoinCmd())
    s, out = step(s, Inbound(1, Join(2)))
    assert 1 not in s.members and isinstance(out[0].msg, Close)


def test_drop_during_pending_mode_commits():
    s = SessionState.create(0, [0, 1, 2])
    for e in (JoinCmd(), Inbound(1, Join(1)), Inbound(2, Join(2)), SetModeCmd(Mode.VIDEO_GRID)):
        s, _ = step(s, e)
    s, _ = step(s, Inbound(1, ModeAck(Mode.VIDEO_GRID)))
    # peer 2 misbehaves instead of acking; the remaining members have all accepted
    assert s.mode is Mode.AVATAR
    s, _ = step(s, Inbound(2, RGBA))
    assert 2 not in s.members
    assert s.mode is Mode.VIDEO_GRID


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 5), st.lists(st.tuples(st.integers(0, 4), st.sampled_from(list(Mode))), max_size=4))
def test_deterministic_and_converges(n, proposals):
    def run():
        mesh = Mesh(n)
        mesh.join_all()
        for who, mode in proposals:
            who %= n
            if mesh.states[who].pending is None:
                mesh.apply(who, SetModeCmd(mode))
            mesh.pump()
        return mesh

    a, b = run(), run()
    assert a.states == b.states and a.log == b.log
    modes = {s.mode for s in a.states.values()}
    assert len(modes) == 1
    for s in a.states.values():
        assert s.phase is Phase.ACTIVE and len(s.placements) == n - 1 and s.pending is None
