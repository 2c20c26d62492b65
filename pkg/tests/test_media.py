from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lifesize.errors import FormatMismatch, InvalidInput, Truncated
from lifesize.fov import FieldOfView, decompose_fov
from lifesize.layout import distance_to_local
from lifesize.media import (
    CalibrationInput,
    ChromaKeyBackend,
    Frame,
    MattingBackend,
    PixelFormat,
    billboard_height,
    chroma_key_matte,
    life_size_scale,
    read_raw_frame,
    rle_compress,
    rle_decompress,
    strip_alpha,
    transparent_count,
    vertical_angle_deg,
    write_raw_frame,
)
from lifesize.models import layout_for

KEY = (0, 255, 0)


def solid(w, h, color):
    return Frame.from_array(np.tile(np.array(color, dtype=np.uint8), (h, w, 1)))


def test_all_key_is_transparent():
    out = chroma_key_matte(solid(8, 6, KEY), KEY, 0)
    assert out.pixel_format is PixelFormat.RGBA_MATTED
    assert transparent_count(out) == 48


def test_no_key_is_opaque():
    out = chroma_key_matte(solid(8, 6, (200, 10, 10)), KEY, 30)
    assert transparent_count(out) == 0
    assert np.all(out.array()[:, :, 3] == 255)


def test_half_key_half_other():
    arr = np.zeros((5, 10, 3), dtype=np.uint8)
    arr[:, :5] = KEY
    arr[:, 5:] = (10, 20, 30)
    out = chroma_key_matte(Frame.from_array(arr), KEY, 0)
    assert transparent_count(out) == 10 // 2 * 5


def test_tolerance_edge():
    near = solid(1, 1, (5, 250, 5))
    assert transparent_count(chroma_key_matte(near, KEY, 5)) == 1
    assert transparent_count(chroma_key_matte(near, KEY, 4)) == 0


frames = st.integers(1, 12).flatmap(
    lambda w: st.integers(1, 12).flatmap(
        lambda h: st.binary(min_size=w * h * 3, max_size=w * h * 3).map(lambda b: Frame(w, h, PixelFormat.RGB, b))
    )
)


@given(frames, st.integers(0, 255))
def test_matte_contract(frame, tol):
    out = chroma_key_matte(frame, KEY, tol)
    assert (out.width, out.height) == (frame.width, frame.height)
    rgb = out.array()[:, :, :3]
    alpha = out.array()[:, :, 3]
    assert set(np.unique(alpha)) <= {0, 255}
    assert np.array_equal(rgb, frame.array())
    # idempotent: re-keying the passed-through color leaves alpha unchanged
    again = chroma_key_matte(strip_alpha(out), KEY, tol)
    assert np.array_equal(again.array()[:, :, 3], alpha)


def test_backend_protocol():
    backend: MattingBackend = ChromaKeyBackend(KEY, 0)
    assert backend.concurrent_safe
    assert transparent_count(backend.matte(solid(2, 2, KEY))) == 4


def test_format_errors():
    rgba = chroma_key_matte(solid(2, 2, KEY))
    with pytest.raises(FormatMismatch):
        chroma_key_matte(rgba)
    with pytest.raises(FormatMismatch):
        strip_alpha(solid(2, 2, KEY))
    with pytest.raises(InvalidInput):
        chroma_key_matte(solid(2, 2, KEY), KEY, -1)
    with pytest.raises(InvalidInput):
        Frame(2, 2, PixelFormat.RGB, b"\x00" * 11)


@given(frames)
def test_raw_frame_round_trip(frame):
    data = write_raw_frame(frame)
    assert len(data) == 8 + len(frame.data)
    assert read_raw_frame(data) == frame


def test_raw_frame_errors():
    data = write_raw_frame(solid(2, 2, KEY))
    with pytest.raises(Truncated):
        read_raw_frame(data[:5])
    with pytest.raises(Truncated):
        read_raw_frame(data[:-1])
    with pytest.raises(InvalidInput):
        read_raw_frame(data + b"\x00")
    with pytest.raises(FormatMismatch):
        read_raw_frame(data[:4] + b"\x09" + data[5:])


@given(st.binary(max_size=2000))
def test_rle_round_trip(data):
    assert rle_decompress(rle_compress(data)) == data


def test_rle_compresses_runs():
    assert len(rle_compress(b"\x00" * 1000)) == 8
    with pytest.raises(Truncated):
        rle_decompress(b"\x01")
    with pytest.raises(InvalidInput):
        rle_decompress(b"\x00\x01")


def calib(**kw):
    base = dict(
        person_pixel_height=1000,
        frame_pixel_height=1000,
        camera_vertical_fov_deg=29.01,
        camera_distance_m=2.0,
        real_height_m=1.7,
    )
    base.update(kw)
    return CalibrationInput(**base)


VFOV_50_3_2 = decompose_fov(FieldOfView(50, 3, 2)).vertical_deg  # 29.0047, printed as 29.01


def test_scale_examples():
    c = calib(camera_vertical_fov_deg=VFOV_50_3_2)
    assert c.apparent_height() == pytest.approx(1.0347, abs=1e-4)
    assert life_size_scale(c) == pytest.approx(1.643, abs=5e-4)
    half = life_size_scale(calib(camera_vertical_fov_deg=VFOV_50_3_2, person_pixel_height=500))
    # exactly twice the full-frame scale (3.2861); the published 3.287 doubles the rounded 1.643
    assert half == pytest.approx(2 * life_size_scale(c), rel=1e-12)
    assert half == pytest.approx(3.287, abs=1e-3)
    ident = calib(camera_vertical_fov_deg=VFOV_50_3_2, real_height_m=c.apparent_height())
    assert life_size_scale(ident) == pytest.approx(1.0, abs=1e-15)


@given(st.floats(10, 170), st.floats(0.2, 10), st.floats(1, 1000), st.floats(0.5, 2.5))
def test_scale_homogeneity(vfov, dist, px, height):
    c = calib(camera_vertical_fov_deg=vfov, camera_distance_m=dist, person_pixel_height=px, real_height_m=height)
    s = life_size_scale(c)
    # the scale is inverse in distance: halving the capture distance doubles it
    assert life_size_scale(calib(camera_vertical_fov_deg=vfov, camera_distance_m=dist / 2, person_pixel_height=px, real_height_m=height)) == pytest.approx(2 * s, rel=1e-12)
    assert life_size_scale(calib(camera_vertical_fov_deg=vfov, camera_distance_m=dist, person_pixel_height=px / 2, real_height_m=height)) == pytest.approx(2 * s, rel=1e-12)
    assert life_size_scale(calib(camera_vertical_fov_deg=vfov, camera_distance_m=dist, person_pixel_height=min(1000, px * 2), real_height_m=height)) == pytest.approx(s * px / min(1000, px * 2), rel=1e-12)


def test_calibration_invariants():
    with pytest.raises(InvalidInput):
        calib(person_pixel_height=1200)
    with pytest.raises(InvalidInput):
        calib(camera_distance_m=0)
    with pytest.raises(InvalidInput):
        calib(camera_vertical_fov_deg=180)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
@pytest.mark.parametrize("eye", [0.0, 1.2, 1.6])
def test_calibrated_billboard_subtends_real_angle(n, eye):
    vfov = decompose_fov(FieldOfView(50)).vertical_deg
    c = calib(person_pixel_height=640, frame_pixel_height=720, camera_vertical_fov_deg=vfov, camera_distance_m=2.3, real_height_m=1.74)
    placed = layout_for(FieldOfView(110), n)
    scale = life_size_scale(c)
    rendered_person = c.apparent_height() * scale
    assert billboard_height(c) * c.person_pixel_height / c.frame_pixel_height == pytest.approx(rendered_person)
    for pose in placed.layout.poses:
        d = math.hypot(pose.x_m, pose.z_m)
        assert vertical_angle_deg(rendered_person, d, eye) == pytest.approx(vertical_angle_deg(1.74, d, eye), abs=1e-9)
    d_top = distance_to_local(placed.layout.placement, 0.0)
    assert vertical_angle_deg(rendered_person, d_top, eye) == pytest.approx(vertical_angle_deg(1.74, d_top, eye), abs=1e-9)
