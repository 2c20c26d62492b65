"""Circular conversation layout with the local user pinned at the bottom.

Frame: local user at the origin looking down +z, x to the right. The
conversation circle of radius R is centered at (0, R), so its top point is
(0, 2R). ``Placement.radian_deg`` is the angle subtended *at the local user*
between the outermost avatars; by the inscribed-angle theorem the avatars
span a central arc of twice that.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import AtOrigin, InvalidCount, InvalidInput

DEGENERATE_RADIAN = "degenerate-radian"


@dataclass(frozen=True)
class Placement:
    radian_deg: float
    radius_m: float

    def __post_init__(self) -> None:
        if not self.radius_m > 0:
            raise InvalidInput(f"radius must be positive, got {self.radius_m}")
        if not (0.0 <= self.radian_deg < 180.0):
            raise InvalidInput(f"radian must be in [0, 180), got {self.radian_deg}")


@dataclass(frozen=True)
class AvatarPose:
    x_m: float
    z_m: float
    yaw_deg: float

    def facing(self) -> tuple[float, float]:
        r = math.radians(self.yaw_deg)
        return math.sin(r), math.cos(r)

    def to_dict(self) -> dict:
        return {"x": self.x_m, "z": self.z_m, "yaw": self.yaw_deg}


@dataclass(frozen=True)
class ConversationLayout:
    placement: Placement
    poses: tuple[AvatarPose, ...]
    n_remote: int
    flags: frozenset[str] = field(default_factory=frozenset)

    @property
    def radian_applicable(self) -> bool:
        return self.n_remote >= 2

    def to_dict(self) -> dict:
        return {
            "placement": {
                "radian_deg": self.placement.radian_deg if self.radian_applicable else None,
                "radius_m": self.placement.radius_m,
            },
            "n_remote": self.n_remote,
            "poses": [p.to_dict() for p in self.poses],
            "flags": sorted(self.flags),
        }


def billboard_yaw(x_m: float, z_m: float) -> float:
    """Yaw (degrees, from +z toward +x) that turns a billboard at (x, z) to face the origin."""
    if x_m == 0 and z_m == 0:
        raise AtOrigin("billboard at the viewer position has no facing direction")
    yaw = math.degrees(math.atan2(-x_m, -z_m))
    if yaw <= -180.0:
        yaw += 360.0
    return yaw


def facing_vector(x_m: float, z_m: float) -> tuple[float, float]:
    if x_m == 0 and z_m == 0:
        raise AtOrigin("billboard at the viewer position has no facing direction")
    norm = math.hypot(x_m, z_m)
    return -x_m / norm, -z_m / norm


def central_offsets(radian_deg: float, n_remote: int) -> list[float]:
    """Central-angle offsets (degrees) from the circle's top point, leftmost first."""
    if n_remote < 1:
        raise InvalidCount(f"need at least one remote user, got {n_remote}")
    if n_remote == 1:
        return [0.0]
    span = 2.0 * radian_deg
    return [span * (i / (n_remote - 1) - 0.5) for i in range(n_remote)]


def pose_at(radius_m: float, offset_deg: float) -> AvatarPose:
    d = math.radians(offset_deg)
    x = radius_m * math.sin(d)
    z = radius_m + radius_m * math.cos(d)
    return AvatarPose(x, z, billboard_yaw(x, z))


def resolve_layout(placement: Placement, n_remote: int) -> ConversationLayout:
    if n_remote < 1:
        raise InvalidCount(f"need at least one remote user, got {n_remote}")
    flags: set[str] = set()
    if n_remote == 1:
        # a lone avatar faces the user directly; Radian has no meaning
        placement = Placement(0.0, placement.radius_m)
    elif placement.radian_deg == 0:
        flags.add(DEGENERATE_RADIAN)
    poses = tuple(
        pose_at(placement.radius_m, off) for off in central_offsets(placement.radian_deg, n_remote)
    )
    return ConversationLayout(placement, poses, n_remote, frozenset(flags))


def distance_to_local(placement: Placement, central_offset_deg: float) -> float:
    """Chord from the local user to the circle point at the given offset from the top."""
    if abs(central_offset_deg) > 180:
        raise InvalidInput(f"central offset must be within [-180, 180], got {central_offset_deg}")
    return 2 * placement.radius_m * math.cos(math.radians(abs(central_offset_deg)) / 2)


def adjacent_gaps(layout: ConversationLayout) -> list[float]:
    """Distances around the circle: local->leftmost, avatar gaps, rightmost->local."""
    pts = [(0.0, 0.0)] + [(p.x_m, p.z_m) for p in layout.poses] + [(0.0, 0.0)]
    return [math.dist(a, b) for a, b in zip(pts, pts[1:])]


def subtended_angle_deg(layout: ConversationLayout) -> float:
    """Angle at the local user between the leftmost and rightmost avatars."""
    a, b = layout.poses[0], layout.poses[-1]
    ang = math.atan2(b.x_m, b.z_m) - math.atan2(a.x_m, a.z_m)
    return abs(math.degrees(ang))
