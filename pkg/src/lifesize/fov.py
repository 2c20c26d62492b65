"""Field-of-view geometry under a planar pinhole model.

A diagonal FoV plus an aspect ratio fixes the horizontal and vertical
half-angles: the image window at unit distance is a rectangle whose
half-diagonal is ``tan(d/2)``, split along the aspect direction.

The occluder rig masks a device frustum down to a smaller target frustum
with four axis-aligned opaque rectangles in a near plane (top and bottom
span the full device width; left and right span only the clear window
height, so the four never overlap).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import AspectMismatch, InvalidInput, TargetExceedsDevice

DEFAULT_OCCLUDER_DISTANCE_M = 0.3
_EDGE_EPS_M = 1e-12  # shared edges are computed along different float paths


@dataclass(frozen=True)
class FieldOfView:
    diagonal_deg: float
    aspect_w: float = 3.0
    aspect_h: float = 2.0

    def __post_init__(self) -> None:
        if not (0.0 < self.diagonal_deg < 180.0):
            raise InvalidInput(f"diagonal FoV must be in (0, 180), got {self.diagonal_deg}")
        if not (self.aspect_w > 0 and self.aspect_h > 0):
            raise InvalidInput(f"aspect must be positive, got {self.aspect_w}:{self.aspect_h}")

    @property
    def aspect(self) -> float:
        return self.aspect_w / self.aspect_h

    def same_aspect(self, other: FieldOfView, rel_tol: float = 1e-12) -> bool:
        return math.isclose(self.aspect, other.aspect, rel_tol=rel_tol)


@dataclass(frozen=True)
class DecomposedFov:
    horizontal_deg: float
    vertical_deg: float

    def recompose_diagonal(self) -> float:
        th = math.tan(math.radians(self.horizontal_deg) / 2)
        tv = math.tan(math.radians(self.vertical_deg) / 2)
        return math.degrees(2 * math.atan(math.hypot(th, tv)))


def parse_aspect(text: str) -> tuple[float, float]:
    """Parse ``"3:2"`` (or ``"16x9"``) into a ``(w, h)`` pair."""
    for sep in (":", "x", "/"):
        if sep in text:
            a, b = text.split(sep, 1)
            break
    else:
        raise InvalidInput(f"aspect must look like W:H, got {text!r}")
    try:
        w, h = float(a), float(b)
    except ValueError:
        raise InvalidInput(f"aspect must look like W:H, got {text!r}") from None
    if w <= 0 or h <= 0:
        raise InvalidInput(f"aspect must be positive, got {text!r}")
    return w, h


def _half_tangents(fov: FieldOfView) -> tuple[float, float]:
    t = math.tan(math.radians(fov.diagonal_deg) / 2)
    norm = math.hypot(fov.aspect_w, fov.aspect_h)
    return t * fov.aspect_w / norm, t * fov.aspect_h / norm


def decompose_fov(fov: FieldOfView) -> DecomposedFov:
    th, tv = _half_tangents(fov)
    return DecomposedFov(
        horizontal_deg=math.degrees(2 * math.atan(th)),
        vertical_deg=math.degrees(2 * math.atan(tv)),
    )


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle in the occluder plane (meters, +y up)."""

    name: str
    center_x: float
    center_y: float
    half_w: float
    half_h: float

    @property
    def area(self) -> float:
        return 4 * self.half_w * self.half_h

    def contains(self, x: float, y: float, eps: float = 0.0) -> bool:
        return (
            abs(x - self.center_x) <= self.half_w + eps
            and abs(y - self.center_y) <= self.half_h + eps
        )

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "center": [self.center_x, self.center_y],
            "half_extents": [self.half_w, self.half_h],
        }


@dataclass(frozen=True)
class OccluderRig:
    distance_m: float
    clear_half_width_m: float
    clear_half_height_m: float
    device_half_width_m: float
    device_half_height_m: float
    occluders: tuple[Rect, ...]

    @property
    def degenerate(self) -> bool:
        """True when the target equals the device and nothing is clipped."""
        return all(r.area <= 1e-15 for r in self.occluders)

    def clear_window(self) -> Rect:
        return Rect("clear", 0.0, 0.0, self.clear_half_width_m, self.clear_half_height_m)

    def intersect(self, dx: float, dy: float, dz: float = 1.0) -> tuple[float, float]:
        """Point where the eye ray with direction (dx, dy, dz) meets the plane."""
        if dz <= 0:
            raise InvalidInput("ray must point into the scene (dz > 0)")
        s = self.distance_m / dz
        return dx * s, dy * s

    def classify(self, x: float, y: float) -> str:
        """Which region a plane point falls in: 'clear', an occluder name, or 'outside'.

        Points strictly inside the clear window are 'clear'; occluders own
        their closed boundary, so the window edge itself reports the occluder.
        """
        if abs(x) < self.clear_half_width_m and abs(y) < self.clear_half_height_m:
            return "clear"
        for rect in self.occluders:
            if rect.area > 0 and rect.contains(x, y, eps=_EDGE_EPS_M):
                return rect.name
        return "outside"

    def to_dict(self) -> dict:
        return {
            "distance_m": self.distance_m,
            "clear_half_width_m": self.clear_half_width_m,
            "clear_half_height_m": self.clear_half_height_m,
            "device_half_width_m": self.device_half_width_m,
            "device_half_height_m": self.device_half_height_m,
            "degenerate": self.degenerate,
            "occluders": [r.to_dict() for r in self.occluders],
        }


def occluder_layout(
    device: FieldOfView,
    target: FieldOfView,
    distance_m: float = DEFAULT_OCCLUDER_DISTANCE_M,
) -> OccluderRig:
    if distance_m <= 0:
        raise InvalidInput(f"occluder distance must be positive, got {distance_m}")
    if not device.same_aspect(target):
        raise AspectMismatch(
            f"device aspect {device.aspect_w:g}:{device.aspect_h:g} differs from "
            f"target {target.aspect_w:g}:{target.aspect_h:g}"
        )
    if target.diagonal_deg > device.diagonal_deg:
        raise TargetExceedsDevice(
            f"target FoV {target.diagonal_deg:g} exceeds device FoV {device.diagonal_deg:g}"
        )

    tth, ttv = _half_tangents(target)
    dth, dtv = _half_tangents(device)
    cw, ch = distance_m * tth, distance_m * ttv
    dw, dh = distance_m * dth, distance_m * dtv

    band_h = (dh - ch) / 2
    band_w = (dw - cw) / 2
    occluders = (
        Rect("top", 0.0, ch + band_h, dw, band_h),
        Rect("bottom", 0.0, -(ch + band_h), dw, band_h),
        Rect("left", -(cw + band_w), 0.0, band_w, ch),
        Rect("right", cw + band_w, 0.0, band_w, ch),
    )
    return OccluderRig(distance_m, cw, ch, dw, dh, occluders)
