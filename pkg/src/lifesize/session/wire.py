"""Bit-exact binary wire format for session messages.

Every message is framed as::

    u32 payload_length | u8 type_tag | payload (payload_length bytes)

All integers and floats are little-endian. Payload layouts per tag:

    1 JOIN       u32 peer_id, u16 name_len, name_len bytes UTF-8
    2 MODE_SET   u8 mode
    3 POSE       u32 timestamp_ms, u8 joint_count, joint_count * (f32 x, f32 y, f32 z)
    4 VIDEO      u32 timestamp_ms, u16 width, u16 height, u8 pixel_format, payload bytes
    5 PLACEMENT  f64 radian_deg, f64 radius_m, u8 n_remote
    6 LEAVE      u32 peer_id
    7 MODE_ACK   u8 mode
    8 CLOSE      u32 peer_id, u8 reason

Joint index 0 is the left wrist, 1 the right wrist. Timestamps are
milliseconds since session start and wrap after about 49.7 days.
"""

from __future__ import annotations

import base64
import enum
import math
import struct
from dataclasses import dataclass
from typing import Iterator, Union

from ..errors import InvariantViolation, LengthMismatch, Truncated, UnknownType
from ..media import PixelFormat

HEADER = struct.Struct("<IB")
HEADER_SIZE = HEADER.size  # 5
U32_MAX = 0xFFFFFFFF

_JOIN = struct.Struct("<IH")
_U8 = struct.Struct("<B")
_U32 = struct.Struct("<I")
_POSE_HEAD = struct.Struct("<IB")
_JOINT = struct.Struct("<3f")
_VIDEO_HEAD = struct.Struct("<IHHB")
_PLACEMENT = struct.Struct("<ddB")
_CLOSE = struct.Struct("<IB")

LEFT_WRIST = 0
RIGHT_WRIST = 1


class Mode(enum.IntEnum):
    AVATAR = 0
    VIDEO_GRID = 1
    VIDEO_AVATAR = 2

    @property
    def slug(self) -> str:
        return self.name.lower().replace("_", "-")

    @classmethod
    def from_slug(cls, text: str) -> Mode:
        key = text.strip().upper().replace("-", "_")
        try:
            return cls[key]
        except KeyError:
            raise ValueError(f"unknown mode {text!r}") from None


class CloseReason(enum.IntEnum):
    PROTOCOL_VIOLATION = 1
    UNKNOWN_PEER = 2


class Tag(enum.IntEnum):
    JOIN = 1
    MODE_SET = 2
    POSE = 3
    VIDEO = 4
    PLACEMENT = 5
    LEAVE = 6
    MODE_ACK = 7
    CLOSE = 8


def _f32(v: float) -> float:
    return struct.unpack("<f", struct.pack("<f", v))[0]


def _check_u32(name: str, v: int) -> None:
    if not 0 <= v <= U32_MAX:
        raise InvariantViolation(f"{name} must fit in u32, got {v}")


@dataclass(frozen=True)
class Join:
    peer_id: int
    display_name: str = ""

    def __post_init__(self) -> None:
        _check_u32("peer_id", self.peer_id)
        if len(self.display_name.encode("utf-8")) > 0xFFFF:
            raise InvariantViolation("display name longer than 65535 bytes")


@dataclass(frozen=True)
class ModeSet:
    mode: Mode

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode", Mode(self.mode))


@dataclass(frozen=True)
class ModeAck:
    mode: Mode

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode", Mode(self.mode))


@dataclass(frozen=True)
class PoseFrame:
    """Joint positions in meters; values are rounded to float32 on construction."""

    timestamp_ms: int
    joints: tuple[tuple[float, float, float], ...]

    def __post_init__(self) -> None:
        _check_u32("timestamp_ms", self.timestamp_ms)
        if not 1 <= len(self.joints) <= 255:
            raise InvariantViolation(f"joint_count must be in 1..255, got {len(self.joints)}")
        joints = []
        for j in self.joints:
            if len(j) != 3:
                raise InvariantViolation("each joint needs (x, y, z)")
            if not all(math.isfinite(c) for c in j):
                raise InvariantViolation(f"joint coordinates must be finite: {j}")
            try:
                joints.append(tuple(_f32(float(c)) for c in j))
            except OverflowError:
                raise InvariantViolation(f"joint coordinate out of float32 range: {j}") from None
        object.__setattr__(self, "joints", tuple(joints))

    @property
    def joint_count(self) -> int:
        return len(self.joints)


@dataclass(frozen=True)
class VideoFrame:
    timestamp_ms: int
    width: int
    height: int
    pixel_format: PixelFormat
    payload: bytes

    def __post_init__(self) -> None:
        _check_u32("timestamp_ms", self.timestamp_ms)
        if not (0 < self.width <= 0xFFFF and 0 < self.height <= 0xFFFF):
            raise InvariantViolation(f"frame size {self.width}x{self.height} out of u16 range")
        try:
            object.__setattr__(self, "pixel_format", PixelFormat(self.pixel_format))
        except ValueError:
            raise InvariantViolation(f"unknown pixel format {self.pixel_format}") from None
        object.__setattr__(self, "payload", bytes(self.payload))


@dataclass(frozen=True)
class PlacementUpdate:
    radian_deg: float
    radius_m: float
    n_remote: int

    def __post_init__(self) -> None:
        if not self.radius_m > 0:
            raise InvariantViolation(f"radius must be positive, got {self.radius_m}")
        if not 0 <= self.radian_deg < 180:
            raise InvariantViolation(f"radian must be in [0, 180), got {self.radian_deg}")
        if not 1 <= self.n_remote <= 255:
            raise InvariantViolation(f"n_remote must be in 1..255, got {self.n_remote}")


@dataclass(frozen=True)
class Leave:
    peer_id: int

    def __post_init__(self) -> None:
        _check_u32("peer_id", self.peer_id)


@dataclass(frozen=True)
class Close:
    peer_id: int
    reason: CloseReason = CloseReason.PROTOCOL_VIOLATION

    def __post_init__(self) -> None:
        _check_u32("peer_id", self.peer_id)
        try:
            object.__setattr__(self, "reason", CloseReason(self.reason))
        except ValueError:
            raise InvariantViolation(f"unknown close reason {self.reason}") from None


Message = Union[Join, ModeSet, ModeAck, PoseFrame, VideoFrame, PlacementUpdate, Leave, Close]

_TAG_OF = {
    Join: Tag.JOIN,
    ModeSet: Tag.MODE_SET,
    PoseFrame: Tag.POSE,
    VideoFrame: Tag.VIDEO,
    PlacementUpdate: Tag.PLACEMENT,
    Leave: Tag.LEAVE,
    ModeAck: Tag.MODE_ACK,
    Close: Tag.CLOSE,
}


def _payload(msg: Message) -> bytes:
    if isinstance(msg, Join):
        name = msg.display_name.encode("utf-8")
        return _JOIN.pack(msg.peer_id, len(name)) + name
    if isinstance(msg, (ModeSet, ModeAck)):
        return _U8.pack(msg.mode)
    if isinstance(msg, PoseFrame):
        return _POSE_HEAD.pack(msg.timestamp_ms, msg.joint_count) + b"".join(
            _JOINT.pack(*j) for j in msg.joints
        )
    if isinstance(msg, VideoFrame):
        head = _VIDEO_HEAD.pack(msg.timestamp_ms, msg.width, msg.height, msg.pixel_format)
        return head + msg.payload
    if isinstance(msg, PlacementUpdate):
        return _PLACEMENT.pack(msg.radian_deg, msg.radius_m, msg.n_remote)
    if isinstance(msg, Leave):
        return _U32.pack(msg.peer_id)
    if isinstance(msg, Close):
        return _CLOSE.pack(msg.peer_id, msg.reason)
    raise UnknownType(f"cannot encode {type(msg).__name__}")


def encode(msg: Message) -> bytes:
    body = _payload(msg)
    return HEADER.pack(len(body), _TAG_OF[type(msg)]) + body


def encoded_size(msg: Message) -> int:
    return len(encode(msg))


def _exact(body: bytes, st: struct.Struct, what: str) -> tuple:
    if len(body) != st.size:
        raise LengthMismatch(f"{what} payload is {len(body)} bytes, expected {st.size}")
    return st.unpack(body)


def _decode_payload(tag: int, body: bytes, mode: Mode | None) -> Message:
    try:
        tag = Tag(tag)
    except ValueError:
        raise UnknownType(f"unknown message tag {tag}") from None

    if tag is Tag.JOIN:
        if len(body) < _JOIN.size:
            raise LengthMismatch("JOIN payload shorter than its fixed header")
        peer_id, n = _JOIN.unpack_from(body)
        if len(body) != _JOIN.size + n:
            raise LengthMismatch(f"JOIN name length {n} disagrees with payload size")
        try:
            name = body[_JOIN.size :].decode("utf-8")
        except UnicodeDecodeError:
            raise InvariantViolation("display name is not valid UTF-8") from None
        return Join(peer_id, name)
    if tag in (Tag.MODE_SET, Tag.MODE_ACK):
        (m,) = _exact(body, _U8, tag.name)
        try:
            m = Mode(m)
        except ValueError:
            raise InvariantViolation(f"unknown mode {m}") from None
        return ModeSet(m) if tag is Tag.MODE_SET else ModeAck(m)
    if tag is Tag.POSE:
        if len(body) < _POSE_HEAD.size:
            raise LengthMismatch("POSE payload shorter than its fixed header")
        ts, count = _POSE_HEAD.unpack_from(body)
        if count == 0:
            raise InvariantViolation("pose frame with zero joints")
        if len(body) != _POSE_HEAD.size + count * _JOINT.size:
            raise LengthMismatch(f"POSE joint_count {count} disagrees with payload size")
        joints = tuple(
            _JOINT.unpack_from(body, _POSE_HEAD.size + i * _JOINT.size) for i in range(count)
        )
        return PoseFrame(ts, joints)
    if tag is Tag.VIDEO:
        if len(body) < _VIDEO_HEAD.size:
            raise LengthMismatch("VIDEO payload shorter than its fixed header")
        ts, w, h, fmt = _VIDEO_HEAD.unpack_from(body)
        try:
            fmt = PixelFormat(fmt)
        except ValueError:
            raise InvariantViolation(f"unknown pixel format {fmt}") from None
        if mode is not None:
            check_frame_mode(fmt, mode)
        if w == 0 or h == 0:
            raise InvariantViolation("video frame with zero size")
        return VideoFrame(ts, w, h, fmt, body[_VIDEO_HEAD.size :])
    if tag is Tag.PLACEMENT:
        radian, radius, n = _exact(body, _PLACEMENT, "PLACEMENT")
        return PlacementUpdate(radian, radius, n)
    if tag is Tag.LEAVE:
        (peer_id,) = _exact(body, _U32, "LEAVE")
        return Leave(peer_id)
    peer_id, reason = _exact(body, _CLOSE, "CLOSE")
    return Close(peer_id, reason)


def check_frame_mode(fmt: PixelFormat, mode: Mode) -> None:
    """Raise if a video pixel format does not belong to the given mode."""
    want = {Mode.VIDEO_GRID: PixelFormat.RGB, Mode.VIDEO_AVATAR: PixelFormat.RGBA_MATTED}.get(mode)
    if want is None:
        raise InvariantViolation(f"video frames are not carried in {mode.slug} mode")
    if fmt is not want:
        raise InvariantViolation(f"{mode.slug} mode needs {want.name} frames, got {fmt.name}")


def _frame_at(buf, offset: int) -> tuple[int, int, int]:
    """(tag, body_start, body_end) of the frame at ``offset``; raises Truncated."""
    avail = len(buf) - offset
    if avail < HEADER_SIZE:
        raise Truncated(f"need {HEADER_SIZE} header bytes, have {avail}")
    length, tag = HEADER.unpack_from(buf, offset)
    start = offset + HEADER_SIZE
    if start + length > len(buf):
        raise Truncated(f"frame declares {length} payload bytes, only {len(buf) - start} available")
    return tag, start, start + length


def decode(buf: bytes, mode: Mode | None = None) -> Message:
    """Decode exactly one framed message occupying all of ``buf``.

    ``mode`` optionally supplies session context so that video frames of the
    wrong pixel format are rejected with :class:`InvariantViolation`.
    """
    tag, start, end = _frame_at(buf, 0)
    if end != len(buf):
        raise LengthMismatch(f"{len(buf) - end} trailing bytes after a {end}-byte frame")
    return _decode_payload(tag, bytes(buf[start:end]), mode)


def iter_decode(buf: bytes) -> Iterator[Message]:
    off = 0
    while off < len(buf):
        tag, start, end = _frame_at(buf, off)
        yield _decode_payload(tag, bytes(buf[start:end]), None)
        off = end


def decode_stream(buf: bytes) -> list[Message]:
    return list(iter_decode(buf))


class StreamDecoder:
    """Incremental decoder for a byte stream that arrives in arbitrary chunks."""

    def __init__(self) -> None:
        self._buf = bytearray()

    def feed(self, data: bytes) -> list[Message]:
        self._buf += data
        out = []
        off = 0
        while True:
            try:
                tag, start, end = _frame_at(self._buf, off)
            except Truncated:
                break
            out.append(_decode_payload(tag, bytes(self._buf[start:end]), None))
            off = end
        del self._buf[:off]
        return out

    @property
    def pending(self) -> int:
        return len(self._buf)


# JSON views, used by transcripts


def message_to_dict(msg: Message) -> dict:
    kind = type(msg).__name__
    if isinstance(msg, Join):
        return {"type": kind, "peer_id": msg.peer_id, "display_name": msg.display_name}
    if isinstance(msg, (ModeSet, ModeAck)):
        return {"type": kind, "mode": msg.mode.slug}
    if isinstance(msg, PoseFrame):
        return {"type": kind, "timestamp_ms": msg.timestamp_ms, "joints": [list(j) for j in msg.joints]}
    if isinstance(msg, VideoFrame):
        return {
            "type": kind,
            "timestamp_ms": msg.timestamp_ms,
            "width": msg.width,
            "height": msg.height,
            "pixel_format": msg.pixel_format.name,
            "payload_b64": base64.b64encode(msg.payload).decode("ascii"),
        }
    if isinstance(msg, PlacementUpdate):
        return {
            "type": kind,
            "radian_deg": msg.radian_deg,
            "radius_m": msg.radius_m,
            "n_remote": msg.n_remote,
        }
    if isinstance(msg, Leave):
        return {"type": kind, "peer_id": msg.peer_id}
    if isinstance(msg, Close):
        return {"type": kind, "peer_id": msg.peer_id, "reason": msg.reason.name}
    raise UnknownType(f"cannot serialize {kind}")


def message_from_dict(d: dict) -> Message:
    kind = d.get("type")
    if kind == "Join":
        return Join(int(d["peer_id"]), d.get("display_name", ""))
    if kind in ("ModeSet", "ModeAck"):
        m = Mode.from_slug(d["mode"])
        return ModeSet(m) if kind == "ModeSet" else ModeAck(m)
    if kind == "PoseFrame":
        return PoseFrame(int(d["timestamp_ms"]), tuple(tuple(j) for j in d["joints"]))
    if kind == "VideoFrame":
        return VideoFrame(
            int(d["timestamp_ms"]),
            int(d["width"]),
            int(d["height"]),
            PixelFormat[d["pixel_format"]],
            base64.b64decode(d["payload_b64"]),
        )
    if kind == "PlacementUpdate":
        return PlacementUpdate(float(d["radian_deg"]), float(d["radius_m"]), int(d["n_remote"]))
    if kind == "Leave":
        return Leave(int(d["peer_id"]))
    if kind == "Close":
        return Close(int(d["peer_id"]), CloseReason[d["reason"]])
    raise UnknownType(f"unknown message type {kind!r}")
