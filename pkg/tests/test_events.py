import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nilmrec.core import make_context
from nilmrec.errors import OutOfRange, UnknownAppliance
from nilmrec.events import (EventKind, EventThresholds, default_thresholds, detect_events,
                            extract_segment, load_threshold_table)
from nilmrec.ingest import PowerSeries


def series(power):
    return PowerSeries(np.arange(len(power), dtype=float), power)


def oracle(power, on, off):
    """Sample-by-sample state machine."""
    state, out = False, []
    for t, p in enumerate(power):
        if not state and p >= on:
            state = True
            out.append(("ON", float(t)))
        elif state and p <= off:
            state = False
            out.append(("OFF", float(t)))
    return out


def as_tuples(events):
    return [(e.kind.value, e.timestamp) for e in events]


def test_kettle_example():
    ev = detect_events(series([0, 0, 2500, 2500, 5]), EventThresholds(2000, 10))
    assert as_tuples(ev) == [("ON", 2.0), ("OFF", 4.0)]


def test_flat_zero_trace():
    assert detect_events(series(np.zeros(50)), EventThresholds(25, 20)) == []


def test_dip_inside_band_does_not_retrigger():
    ev = detect_events(series([0, 30, 20, 30, 5]), EventThresholds(25, 10))
    assert as_tuples(ev) == [("ON", 1.0), ("OFF", 4.0)]
    assert as_tuples(ev) == oracle([0, 30, 20, 30, 5], 25, 10)


def test_builtin_thresholds():
    assert default_thresholds("kettle") == EventThresholds(2000, 10)
    assert default_thresholds("Fridge") == EventThresholds(70, 10)
    assert default_thresholds("blond_default") == EventThresholds(25, 20)
    with pytest.raises(UnknownAppliance):
        default_thresholds("spaceship")


def test_thresholds_invariant():
    with pytest.raises(ValueError):
        EventThresholds(10, 10)
    with pytest.raises(ValueError):
        EventThresholds(10, -1)


def test_override_file(tmp_path):
    p = tmp_path / "th.txt"
    p.write_text("# house 2\nkettle, 1500, 5\n\nnew device, 12, 3\n")
    table = load_threshold_table(p)
    assert default_thresholds("kettle", table) == EventThresholds(1500, 5)
    assert default_thresholds("new-device", table) == EventThresholds(12, 3)
    assert default_thresholds("fridge", table) == EventThresholds(70, 10)


powers = st.lists(st.floats(0, 3000, allow_nan=False), min_size=1, max_size=200)
bands = st.tuples(st.floats(1, 2500), st.floats(0, 1)).map(lambda t: (t[0], t[0] * t[1] * 0.999))


@settings(max_examples=300, deadline=None)
@given(powers, bands)
def test_matches_sample_oracle(power, band):
    on, off = band
    assert as_tuples(detect_events(series(power), EventThresholds(on, off))) == oracle(power, on, off)


@settings(max_examples=300, deadline=None)
@given(powers, bands, st.floats(0, 500))
def test_properties(power, band, raise_by):
    on, off = band
    ev = detect_events(series(power), EventThresholds(on, off))
    kinds = [e.kind for e in ev]
    assert all(k is (EventKind.ON if i % 2 == 0 else EventKind.OFF) for i, k in enumerate(kinds))
    ts = [e.timestamp for e in ev]
    assert all(a < b for a, b in zip(ts, ts[1:]))
    higher = detect_events(series(power), EventThresholds(on + raise_by, off))
    n_on = sum(k is EventKind.ON for k in kinds)
    assert sum(e.kind is EventKind.ON for e in higher) <= n_on


def test_extract_segment_positions():
    ctx = make_context(16000, 50, 0.5)
    cur = np.arange(40000, dtype=float)
    vol = -cur
    s0 = extract_segment(cur, vol, ctx, 0.0)
    assert s0.current[0] == 0 and s0.current[-1] == 7999
    s1 = extract_segment(cur, vol, ctx, 1.0)
    assert s1.current[0] == 16000 and s1.current[-1] == 23999
    assert s1 == extract_segment(cur, vol, ctx, 1.0)
    with pytest.raises(OutOfRange):
        extract_segment(cur, vol, ctx, 40000 / 16000 - 0.3)
    s2 = extract_segment(cur, vol, ctx, 11.0, stream_start=10.0)
    assert s2.current[0] == 16000
