from __future__ import annotations

import random
import struct

import pytest
from hypothesis import given
from hypothesis import strategies as st

from lifesize.errors import InvariantViolation, LengthMismatch, Truncated, UnknownType
from lifesize.media import PixelFormat
from lifesize.session.wire import (
    HEADER_SIZE,
    Join,
    Leave,
    Mode,
    ModeSet,
    PlacementUpdate,
    PoseFrame,
    StreamDecoder,
    Tag,
    VideoFrame,
    decode,
    decode_stream,
    encode,
    encoded_size,
    message_from_dict,
    message_to_dict,
)
from strategies import messages, random_message


def test_pose_frame_sizes():
    msg = PoseFrame(1234, ((0.1, 1.0, 0.3), (-0.1, 1.0, 0.3)))
    data = encode(msg)
    assert len(data) == 34
    length, tag = struct.unpack_from("<IB", data)
    assert (length, tag) == (29, Tag.POSE)


def test_exact_bytes_for_join():
    assert encode(Join(7, "ab")) == bytes.fromhex("0800000001" "07000000" "0200" "6162")


def test_video_overhead():
    msg = VideoFrame(0, 160, 120, PixelFormat.RGB, b"\x00" * 100)
    assert encoded_size(msg) == 100 + 14


@given(messages)
def test_round_trip(msg):
    assert decode(encode(msg)) == msg


def test_seeded_round_trip_bit_exact():
    rng = random.Random(1234)
    for _ in range(2000):
        msg = random_message(rng)
        data = encode(msg)
        back = decode(data)
        assert back == msg
        assert encode(back) == data


@given(st.lists(messages, max_size=20))
def test_concatenation_self_delimiting(msgs):
    assert decode_stream(b"".join(encode(m) for m in msgs)) == msgs


@given(st.lists(messages, min_size=1, max_size=10), st.randoms(use_true_random=False))
def test_incremental_decoder(msgs, rnd):
    blob = b"".join(encode(m) for m in msgs)
    dec = StreamDecoder()
    out, off = [], 0
    while off < len(blob):
        n = rnd.randint(1, 7)
        out += dec.feed(blob[off : off + n])
        off += n
    assert out == msgs and dec.pending == 0


def test_truncated():
    data = encode(Leave(1))
    with pytest.raises(Truncated):
        decode(data[:3])
    with pytest.raises(Truncated):
        decode(data[:-1])
    # declared length larger than the buffer
    with pytest.raises(Truncated):
        decode(struct.pack("<IB", 100, Tag.LEAVE) + b"\x00" * 4)


def test_trailing_bytes():
    with pytest.raises(LengthMismatch):
        decode(encode(Leave(1)) + b"\x00")


def test_unknown_tag():
    with pytest.raises(UnknownType):
        decode(struct.pack("<IB", 0, 99))


def test_payload_length_disagrees():
    body = struct.pack("<IB", 1, 2) + b"\x00" * 12  # claims 2 joints, carries 1
    with pytest.raises(LengthMismatch):
        decode(struct.pack("<IB", len(body), Tag.POSE) + body)
    with pytest.raises(LengthMismatch):
        decode(struct.pack("<IB", 3, Tag.LEAVE) + b"\x00" * 3)


def test_invariant_violations():
    frame = encode(VideoFrame(0, 4, 4, PixelFormat.RGB, b""))
    with pytest.raises(InvariantViolation):
        decode(frame, mode=Mode.VIDEO_AVATAR)
    with pytest.raises(InvariantViolation):
        decode(frame, mode=Mode.AVATAR)
    assert decode(frame, mode=Mode.VIDEO_GRID).pixel_format is PixelFormat.RGB
    with pytest.raises(InvariantViolation):
        decode(struct.pack("<IB", 1, Tag.MODE_SET) + b"\x09")
    zero_joints = struct.pack("<IB", 0, 0)
    with pytest.raises(InvariantViolation):
        decode(struct.pack("<IB", len(zero_joints), Tag.POSE) + zero_joints)


@pytest.mark.parametrize(
    "build",
    [
        lambda: PoseFrame(0, ()),
        lambda: PoseFrame(0, ((float("nan"), 0.0, 0.0),)),
        lambda: PoseFrame(0, ((1e40, 0.0, 0.0),)),
        lambda: PoseFrame(2**32, ((0.0, 0.0, 0.0),)),
        lambda: VideoFrame(0, 0, 10, PixelFormat.RGB, b""),
        lambda: PlacementUpdate(180.0, 1.0, 2),
        lambda: PlacementUpdate(10.0, 0.0, 2),
        lambda: Join(-1),
    ],
)
def test_constructor_invariants(build):
    with pytest.raises(InvariantViolation):
        build()


def test_header_size():
    assert HEADER_SIZE == 5
    assert len(encode(ModeSet(Mode.VIDEO_GRID))) == HEADER_SIZE + 1


@given(messages)
def test_dict_round_trip(msg):
    assert message_from_dict(message_to_dict(msg)) == msg
