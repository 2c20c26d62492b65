"""Life-size video-avatar layouts and session toolkit for HMD group calls."""

from .fov import DecomposedFov, FieldOfView, OccluderRig, decompose_fov, occluder_layout
from .layout import (
    AvatarPose,
    ConversationLayout,
    Placement,
    adjacent_gaps,
    billboard_yaw,
    distance_to_local,
    resolve_layout,
)
from .models import PlacementModel, layout_for, pilot_lookup, predict_placement

__version__ = "0.1.0"

__all__ = [
    "AvatarPose",
    "ConversationLayout",
    "DecomposedFov",
    "FieldOfView",
    "OccluderRig",
    "Placement",
    "PlacementModel",
    "adjacent_gaps",
    "billboard_yaw",
    "decompose_fov",
    "distance_to_local",
    "layout_for",
    "occluder_layout",
    "pilot_lookup",
    "predict_placement",
    "resolve_layout",
]
