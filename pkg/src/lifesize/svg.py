"""Static top-down SVG plot of a conversation layout."""

from __future__ import annotations

from .layout import ConversationLayout

_PX_PER_M = 120.0
_MARGIN_M = 0.4
_TICK_M = 0.25


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def layout_svg(layout: ConversationLayout, title: str = "") -> str:
    """Local user (square), conversation circle, avatars (dots) with yaw ticks.

    World +z points up the page; x to the right.
    """
    r = layout.placement.radius_m
    min_x, max_x = -r - _MARGIN_M, r + _MARGIN_M
    min_z, max_z = -_MARGIN_M, 2 * r + _MARGIN_M
    w = (max_x - min_x) * _PX_PER_M
    h = (max_z - min_z) * _PX_PER_M

    def px(x: float, z: float) -> tuple[str, str]:
        return _fmt((x - min_x) * _PX_PER_M), _fmt((max_z - z) * _PX_PER_M)

    cx, cy = px(0.0, r)
    ux, uy = px(0.0, 0.0)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(w)}" height="{_fmt(h)}" '
        f'viewBox="0 0 {_fmt(w)} {_fmt(h)}">',
        f'<rect width="{_fmt(w)}" height="{_fmt(h)}" fill="white"/>',
        f'<circle cx="{cx}" cy="{cy}" r="{_fmt(r * _PX_PER_M)}" fill="none" '
        f'stroke="#999" stroke-dasharray="6 4"/>',
        f'<rect x="{_fmt(float(ux) - 7)}" y="{_fmt(float(uy) - 7)}" width="14" height="14" '
        f'fill="#1f77b4"><title>local user</title></rect>',
    ]
    for i, pose in enumerate(layout.poses):
        x, y = px(pose.x_m, pose.z_m)
        fx, fz = pose.facing()
        tx, ty = px(pose.x_m + _TICK_M * fx, pose.z_m + _TICK_M * fz)
        parts.append(f'<line x1="{x}" y1="{y}" x2="{tx}" y2="{ty}" stroke="#d62728" stroke-width="2"/>')
        parts.append(
            f'<circle cx="{x}" cy="{y}" r="8" fill="#d62728">'
            f"<title>avatar {i}: x={pose.x_m:.3f} z={pose.z_m:.3f} yaw={pose.yaw_deg:.1f}</title></circle>"
        )
    label = title or (
        f"R={r:.3f} m, Radian="
        + (f"{layout.placement.radian_deg:.2f}" if layout.radian_applicable else "n/a")
        + f", {layout.n_remote} remote"
    )
    parts.append(f'<text x="8" y="18" font-family="sans-serif" font-size="13">{label}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"

