"""Capture-side plumbing: frames, matting backends, life-size calibration.

Only a deterministic chroma-key matting backend ships here; a neural
segmenter would implement the same :class:`MattingBackend` protocol.
"""

from __future__ import annotations

import enum
import math
import struct
from dataclasses import dataclass
from typing import Protocol

import numpy as np

from .errors import FormatMismatch, InvalidInput, Truncated


class PixelFormat(enum.IntEnum):
    RGB = 0
    RGBA_MATTED = 1

    @property
    def bytes_per_pixel(self) -> int:
        return 3 if self is PixelFormat.RGB else 4


@dataclass(frozen=True)
class Frame:
    width: int
    height: int
    pixel_format: PixelFormat
    data: bytes

    def __post_init__(self) -> None:
        if self.width <= 0 or self.height <= 0:
            raise InvalidInput(f"frame size must be positive, got {self.width}x{self.height}")
        expected = self.width * self.height * PixelFormat(self.pixel_format).bytes_per_pixel
        if len(self.data) != expected:
            raise InvalidInput(f"frame payload is {len(self.data)} bytes, expected {expected}")

    def array(self) -> np.ndarray:
        bpp = PixelFormat(self.pixel_format).bytes_per_pixel
        return np.frombuffer(self.data, dtype=np.uint8).reshape(self.height, self.width, bpp)

    @classmethod
    def from_array(cls, arr: np.ndarray) -> Frame:
        arr = np.ascontiguousarray(arr, dtype=np.uint8)
        if arr.ndim != 3 or arr.shape[2] not in (3, 4):
            raise InvalidInput(f"expected HxWx3 or HxWx4 array, got shape {arr.shape}")
        fmt = PixelFormat.RGB if arr.shape[2] == 3 else PixelFormat.RGBA_MATTED
        return cls(arr.shape[1], arr.shape[0], fmt, arr.tobytes())


class MattingBackend(Protocol):
    """Turns an RGB frame into an RGBA-matted frame of the same size."""

    concurrent_safe: bool

    def matte(self, frame: Frame) -> Frame: ...


def chroma_key_matte(
    frame: Frame, key_color: tuple[int, int, int] = (0, 255, 0), tolerance: int = 0
) -> Frame:
    """Alpha 0 where every channel is within ``tolerance`` of the key color, else 255."""
    if tolerance < 0:
        raise InvalidInput(f"tolerance must be >= 0, got {tolerance}")
    if PixelFormat(frame.pixel_format) is not PixelFormat.RGB:
        raise FormatMismatch("chroma keying needs an RGB frame")
    rgb = frame.array()
    key = np.asarray(key_color, dtype=np.int16)
    deviation = np.abs(rgb.astype(np.int16) - key).max(axis=2)
    alpha = np.where(deviation <= tolerance, 0, 255).astype(np.uint8)
    return Frame.from_array(np.dstack([rgb, alpha]))


def strip_alpha(frame: Frame) -> Frame:
    if PixelFormat(frame.pixel_format) is not PixelFormat.RGBA_MATTED:
        raise FormatMismatch("frame has no alpha channel")
    return Frame.from_array(frame.array()[:, :, :3])


@dataclass
class ChromaKeyBackend:
    key_color: tuple[int, int, int] = (0, 255, 0)
    tolerance: int = 40
    concurrent_safe: bool = True

    def matte(self, frame: Frame) -> Frame:
        return chroma_key_matte(frame, self.key_color, self.tolerance)


def transparent_count(frame: Frame) -> int:
    if PixelFormat(frame.pixel_format) is not PixelFormat.RGBA_MATTED:
        raise FormatMismatch("frame has no alpha channel")
    return int(np.count_nonzero(frame.array()[:, :, 3] == 0))


# raw frame files: u16 width, u16 height, u8 format, 3 reserved, then pixels
_RAW_HEADER = struct.Struct("<HHB3x")


def write_raw_frame(frame: Frame) -> bytes:
    return _RAW_HEADER.pack(frame.width, frame.height, int(frame.pixel_format)) + frame.data


def read_raw_frame(buf: bytes) -> Frame:
    if len(buf) < _RAW_HEADER.size:
        raise Truncated(f"raw frame header needs {_RAW_HEADER.size} bytes, got {len(buf)}")
    w, h, tag = _RAW_HEADER.unpack_from(buf)
    try:
        fmt = PixelFormat(tag)
    except ValueError:
        raise FormatMismatch(f"unknown pixel format tag {tag}") from None
    body = bytes(buf[_RAW_HEADER.size :])
    need = w * h * fmt.bytes_per_pixel
    if len(body) < need:
        raise Truncated(f"raw frame body needs {need} bytes, got {len(body)}")
    if len(body) > need:
        raise InvalidInput(f"raw frame has {len(body) - need} trailing bytes")
    return Frame(w, h, fmt, body)


def rle_compress(data: bytes) -> bytes:
    """Byte-level run-length coding as (count, value) pairs, count in 1..255."""
    out = bytearray()
    i, n = 0, len(data)
    while i < n:
        j = i
        while j < n and j - i < 255 and data[j] == data[i]:
            j += 1
        out += bytes((j - i, data[i]))
        i = j
    return bytes(out)


def rle_decompress(data: bytes) -> bytes:
    if len(data) % 2:
        raise Truncated("run-length stream has an odd number of bytes")
    out = bytearray()
    for k in range(0, len(data), 2):
        count, value = data[k], data[k + 1]
        if count == 0:
            raise InvalidInput("zero-length run")
        out += bytes((value,)) * count
    return bytes(out)


@dataclass(frozen=True)
class CalibrationInput:
    person_pixel_height: float
    frame_pixel_height: float
    camera_vertical_fov_deg: float
    camera_distance_m: float
    real_height_m: float

    def __post_init__(self) -> None:
        for name in (
            "person_pixel_height",
            "frame_pixel_height",
            "camera_vertical_fov_deg",
            "camera_distance_m",
            "real_height_m",
        ):
            if not getattr(self, name) > 0:
                raise InvalidInput(f"{name} must be positive")
        if self.person_pixel_height > self.frame_pixel_height:
            raise InvalidInput("person cannot be taller than the frame")
        if self.camera_vertical_fov_deg >= 180:
            raise InvalidInput("camera vertical FoV must be below 180 degrees")

    def frame_world_height(self) -> float:
        """Height in meters covered by the full frame at the subject's distance."""
        return 2 * self.camera_distance_m * math.tan(math.radians(self.camera_vertical_fov_deg) / 2)

    def apparent_height(self) -> float:
        return self.frame_world_height() * self.person_pixel_height / self.frame_pixel_height


def life_size_scale(c: CalibrationInput) -> float:
    """Factor that makes the person on the billboard exactly ``real_height_m`` tall."""
    return c.real_height_m / c.apparent_height()


def billboard_height(c: CalibrationInput) -> float:
    """World height of the whole calibrated billboard quad (full frame)."""
    return c.frame_world_height() * life_size_scale(c)


def vertical_angle_deg(height_m: float, distance_m: float, eye_height_m: float = 0.0) -> float:
    """Vertical angle a segment from the floor to ``height_m`` subtends from an eye at ``eye_height_m``."""
    top = math.atan2(height_m - eye_height_m, distance_m)
    bottom = math.atan2(-eye_height_m, distance_m)
    return math.degrees(top - bottom)
