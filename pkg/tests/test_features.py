import numpy as np
import pytest

from conftest import sine
from nilmrec.core import EventSegment, make_context, make_rng
from nilmrec.errors import DegenerateSignal, DimsTooLarge, EmptyConfig
from nilmrec.features import (FeatureConfig, RandomSubsampler, extract_handcrafted,
                              extract_matrix, handcrafted_extractor, random_subsample, rms25)
from nilmrec.ingest import default_signatures, generate_dataset

GOLDEN_COLUMNS = (
    "active_power", "apparent_power", "reactive_power", "admittance", "crest_factor",
    "form_factor", "phase_shift", *(f"harmonic_{k}" for k in range(1, 16)), "thd",
    "spectral_flatness", "cycle_rms_mean", "cycle_rms_std", "cycle_rms_max", "cycle_rms_min",
    "max_inrush_ratio", "inrush_current_ratio",
)


def seg(ctx, i, v=None):
    return EventSegment(i, sine(ctx, 325.0) if v is None else v, ctx, "x")


def dft_magnitude(x, k_cycles):
    """Direct O(N) DFT at one bin, amplitude-scaled."""
    n = np.arange(x.size)
    acc = sum(x[j] * complex(np.cos(2 * np.pi * k_cycles * j / x.size),
                             -np.sin(2 * np.pi * k_cycles * j / x.size)) for j in n)
    return 2 * abs(acc) / x.size


def test_golden_columns(ctx2k):
    fv = extract_handcrafted(seg(ctx2k, sine(ctx2k, 2.0)))
    assert fv.names == GOLDEN_COLUMNS and len(fv) == 30
    again = extract_handcrafted(seg(ctx2k, sine(ctx2k, 2.0)))
    assert fv.values.tobytes() == again.values.tobytes()


def test_thd_and_harmonics_against_dft(ctx2k):
    i = sine(ctx2k, 1.0) + sine(ctx2k, 0.1, order=3)
    d = extract_handcrafted(seg(ctx2k, i)).as_dict()
    oracle = [dft_magnitude(i, k * ctx2k.n_cycles) for k in range(1, 16)]
    oracle = np.array(oracle) / oracle[0]
    got = np.array([d[f"harmonic_{k}"] for k in range(1, 16)])
    np.testing.assert_allclose(got, oracle, atol=1e-9)
    np.testing.assert_allclose(got[:4], [1, 0, 0.1, 0], atol=1e-9)
    assert d["thd"] == pytest.approx(0.1, rel=1e-9)


def test_harmonic_oracle_multisine(ctx2k):
    amps = {1: 2.0, 3: 0.5, 5: 0.3, 7: 0.05}
    i = sum(sine(ctx2k, a, order=k, phase=0.3 * k) for k, a in amps.items())
    d = extract_handcrafted(seg(ctx2k, i)).as_dict()
    for k, a in amps.items():
        assert d[f"harmonic_{k}"] == pytest.approx(a / 2.0, rel=1e-6)


def test_power_identities(ctx2k):
    phi = np.pi / 3
    v = sine(ctx2k, 2.0)
    i = sine(ctx2k, 3.0, phase=-phi)
    d = extract_handcrafted(seg(ctx2k, i, v)).as_dict()
    assert d["active_power"] == pytest.approx(2.0 * 3.0 / 4, rel=1e-12)
    assert d["apparent_power"] == pytest.approx(3.0, rel=1e-12)
    assert d["phase_shift"] == pytest.approx(phi, rel=1e-9)
    assert d["admittance"] == pytest.approx(1.5, rel=1e-12)
    assert d["crest_factor"] == pytest.approx(np.abs(i).max() / (3.0 / np.sqrt(2)), rel=1e-12)


def test_pq_s_identity_on_generated_data(ctx2k):
    ds = generate_dataset(default_signatures(8), 3, ctx2k, make_rng(5))
    for s in ds.segments:
        d = extract_handcrafted(s).as_dict()
        p, q, sa = d["active_power"], d["reactive_power"], d["apparent_power"]
        assert p * p + q * q == pytest.approx(sa * sa, rel=1e-9)


def test_scale_covariance(ctx2k):
    ds = generate_dataset(default_signatures(4), 1, ctx2k, make_rng(6))
    linear = ("active_power", "apparent_power", "reactive_power", "admittance",
              "cycle_rms_mean", "cycle_rms_max")
    invariant = ("crest_factor", "form_factor", "thd", "phase_shift", "spectral_flatness",
                 "harmonic_3", "max_inrush_ratio")
    for s in ds.segments:
        c = 3.7
        a = extract_handcrafted(s).as_dict()
        b = extract_handcrafted(EventSegment(s.current * c, s.voltage, ctx2k, "x")).as_dict()
        for k in linear:
            assert b[k] == pytest.approx(c * a[k], rel=1e-9)
        for k in invariant:
            assert b[k] == pytest.approx(a[k], rel=1e-9, abs=1e-12)
        r1, r2 = rms25(s).values, rms25(EventSegment(-c * s.current, s.voltage, ctx2k)).values
        np.testing.assert_allclose(r2, c * r1, rtol=1e-12)


def test_rms25(ctx2k):
    np.testing.assert_allclose(rms25(seg(ctx2k, sine(ctx2k, 4.0))).values,
                               4.0 / np.sqrt(2), atol=1e-9)
    assert not rms25(seg(ctx2k, np.zeros(1000))).values.any()
    consts = np.linspace(-3, 3, 25)
    stepped = np.repeat(consts, ctx2k.samples_per_cycle)
    np.testing.assert_array_equal(rms25(seg(ctx2k, stepped)).values, np.abs(consts))


def test_silent_current_and_dead_voltage(ctx2k):
    d = extract_handcrafted(seg(ctx2k, np.zeros(1000))).as_dict()
    assert all(np.isfinite(list(d.values())))
    assert d["crest_factor"] == 0.0 and d["thd"] == 0.0
    with pytest.raises(DegenerateSignal):
        extract_handcrafted(seg(ctx2k, sine(ctx2k), np.zeros(1000)))
    cfg = FeatureConfig(groups=("active_power", "thd"))
    assert len(extract_handcrafted(seg(ctx2k, sine(ctx2k), np.zeros(1000)), cfg)) == 2


def test_nyquist_guard():
    ctx = make_context(1000, 50, 0.5)
    with pytest.raises(ValueError):
        extract_handcrafted(seg(ctx, sine(ctx)))


def test_random_subsample(ctx2k):
    s = seg(ctx2k, sine(ctx2k, 2.0, phase=0.1))
    full = random_subsample(s, 1000, make_rng(0))
    np.testing.assert_array_equal(full.values, s.current)
    ctx16 = make_context(16000, 50, 0.5)
    sub = RandomSubsampler(8000, 212, make_rng(1))
    assert np.unique(sub.indices).size == 212 and sub.indices.max() < 8000
    assert np.all(np.diff(sub.indices) > 0)
    a = random_subsample(s, 50, make_rng(7))
    b = random_subsample(EventSegment(s.current * 2, s.voltage, ctx2k), 50, make_rng(7))
    assert a.names == b.names and np.allclose(b.values, 2 * a.values)
    with pytest.raises(DimsTooLarge):
        RandomSubsampler(ctx16.samples_per_segment, 8001, make_rng(0))


def test_extract_matrix(ctx2k):
    ds = generate_dataset(default_signatures(2), 5, ctx2k, make_rng(0))
    m = extract_matrix(ds, rms25)
    assert m.shape == (10, 25) and m.labels == tuple(ds.labels)
    with pytest.raises(EmptyConfig):
        extract_matrix(ds, handcrafted_extractor(FeatureConfig(groups=())))
