from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from lifesize.errors import InvalidInput, NonMonotoneTime
from lifesize.session.bandwidth import (
    AVATAR_BUDGET_BPS,
    VIDEO_BUDGET_BPS,
    BandwidthMeter,
    TokenBucketPacer,
    meter_record,
    pace,
)


def steady(meter: BandwidthMeter, sid: str, size: int, hz: float, seconds: float) -> float:
    n = int(round(hz * seconds))
    rate = 0.0
    for k in range(n):
        rate = meter_record(meter, sid, size, k / hz)
    return rate


def test_pose_stream_rate():
    rate = steady(BandwidthMeter(1.0), "pose", 34, 30, 3)
    assert rate == 8160.0
    assert rate < AVATAR_BUDGET_BPS


def test_video_stream_rate():
    rate = steady(BandwidthMeter(1.0), "video", 2500, 15, 3)
    assert rate == 300_000.0 == VIDEO_BUDGET_BPS


def test_idle_window_reads_zero():
    m = BandwidthMeter(1.0)
    m.record("a", 1000, 0.0)
    assert m.rate("a", 1.0) == 0.0
    assert m.rate("never", 1.0) == 0.0


def test_window_is_half_open():
    m = BandwidthMeter(1.0)
    m.record("a", 10, 0.0)
    assert m.rate("a", 0.999) == 80.0
    assert m.rate("a", 1.0) == 0.0


def test_meter_time_must_not_go_back():
    m = BandwidthMeter()
    m.record("a", 1, 2.0)
    with pytest.raises(NonMonotoneTime):
        m.record("a", 1, 1.0)
    with pytest.raises(InvalidInput):
        BandwidthMeter(0)


@given(st.lists(st.tuples(st.sampled_from("abcd"), st.integers(0, 5000), st.floats(0, 0.5)), max_size=60))
def test_meter_additive(events):
    m = BandwidthMeter(1.0)
    t = 0.0
    for sid, size, dt in events:
        t += dt
        m.record(sid, size, t)
    assert m.total_rate(t) == pytest.approx(sum(m.rates(t).values()), abs=1.0)


def _offer(pacer, size, hz, seconds):
    return pace(pacer, [(k / hz, size) for k in range(int(round(hz * seconds)))])


def test_overload_paced_to_budget():
    pacer = TokenBucketPacer(300_000, 5000)
    decisions = _offer(pacer, 5000, 15, 10)
    meter = BandwidthMeter(1.0)
    peak = 0.0
    for k, ok in enumerate(decisions):
        if ok:
            peak = max(peak, meter.record("v", 5000, k / 15))
    assert peak <= 300_000 + 8 * 5000
    drop_ratio = pacer.dropped / pacer.offered
    assert drop_ratio == pytest.approx(0.5, abs=0.05)
    assert not pacer.starved


def test_under_budget_no_drops():
    pacer = TokenBucketPacer(10_000, 34)
    assert all(_offer(pacer, 34, 30, 10))
    assert pacer.dropped == 0


def test_exactly_at_budget_no_drops():
    pacer = TokenBucketPacer(300_000, 2500)
    assert all(_offer(pacer, 2500, 15, 10))


def test_starvation():
    pacer = TokenBucketPacer(1000, 500)
    assert not any(_offer(pacer, 500, 1, 5))
    assert pacer.starved and pacer.dropped == 5


def test_frame_larger_than_bucket_starves():
    pacer = TokenBucketPacer(1_000_000, 100)
    assert not pacer.offer(200, 0.0)
    assert pacer.starved


def test_pacer_time_and_parameters():
    pacer = TokenBucketPacer(1000, 10)
    pacer.offer(10, 1.0)
    with pytest.raises(NonMonotoneTime):
        pacer.offer(10, 0.5)
    with pytest.raises(InvalidInput):
        TokenBucketPacer(0, 10)
    with pytest.raises(InvalidInput):
        TokenBucketPacer(10, 0)


@given(st.floats(1000, 1e6), st.integers(10, 5000), st.floats(1, 60), st.floats(1, 5))
def test_pacing_bound_property(budget, size, hz, seconds):
    pacer = TokenBucketPacer(budget, size)
    frames = [(k / hz, size) for k in range(int(hz * seconds))]
    decisions = pace(pacer, frames)
    sent = [t for (t, _), ok in zip(frames, decisions) if ok]
    meter = BandwidthMeter(1.0)
    for t in sent:
        rate = meter.record("s", size, t)
        assert rate <= budget + 8 * size + 1e-6
