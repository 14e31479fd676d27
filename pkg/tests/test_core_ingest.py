import numpy as np
import pytest

from nilmrec.core import EventSegment, LabeledDataset, make_context, make_rng
from nilmrec.errors import (DuplicateClassName, FormatError, LengthMismatch,
                            NonIntegralCycles)
from nilmrec.features import cycle_rms
from nilmrec.ingest import (ApplianceSignature, default_signatures, generate_dataset,
                            read_segments, write_segments)


def test_context_examples():
    c = make_context(16000, 50, 0.5)
    assert (c.samples_per_segment, c.n_cycles, c.samples_per_cycle) == (8000, 25, 320)
    c = make_context(50000, 50, 0.5)
    assert (c.samples_per_segment, c.n_cycles) == (25000, 25)
    with pytest.raises(NonIntegralCycles):
        make_context(16000, 60, 0.5)


def test_context_rejects_exactly_divisibility_failures():
    for fs in range(1000, 3001, 10):
        if fs % 50:
            with pytest.raises(NonIntegralCycles):
                make_context(fs, 50, 0.5)
        else:
            assert make_context(fs, 50, 0.5).n_cycles == 25


def test_rng_streams_reproducible():
    a, b = make_rng(42), make_rng(42)
    assert np.array_equal(a.random(10_000), b.random(10_000))
    assert not np.array_equal(make_rng(42, "x").random(8), make_rng(42, "y").random(8))


def test_segment_length_checked(ctx2k):
    with pytest.raises(LengthMismatch):
        EventSegment(np.zeros(999), np.zeros(999), ctx2k)
    seg = EventSegment(np.zeros(1000), np.zeros(1000), ctx2k, "a")
    with pytest.raises(ValueError):
        seg.current[0] = 1.0


def test_dataset_counts_and_duplicates(ctx2k):
    sigs = [ApplianceSignature("a", 1.0), ApplianceSignature("b", 2.0)]
    ds = generate_dataset(sigs, 5, ctx2k, make_rng(0))
    assert len(ds) == 10 and ds.class_names == ("a", "b")
    with pytest.raises(DuplicateClassName):
        generate_dataset([sigs[0], sigs[0]], 5, ctx2k, make_rng(0))


def test_pure_sine_cycle_rms(ctx2k):
    sig = ApplianceSignature("s", 3.0)
    ds = generate_dataset([sig], 3, ctx2k, make_rng(1))
    for seg in ds.segments:
        r = cycle_rms(seg.current, ctx2k.samples_per_cycle)
        np.testing.assert_allclose(r, 3.0 / np.sqrt(2), rtol=0, atol=1e-9)


def test_generator_deterministic(ctx2k):
    a = generate_dataset(default_signatures(4), 6, ctx2k, make_rng(9))
    b = generate_dataset(default_signatures(4), 6, ctx2k, make_rng(9))
    assert all(x == y for x, y in zip(a.segments, b.segments))
    assert a.currents().tobytes() == b.currents().tobytes()


def test_rms_separable_by_amplitude(ctx2k):
    sigs = [ApplianceSignature(f"c{k}", 1.0 + k, noise_std=0.01) for k in range(5)]
    ds = generate_dataset(sigs, 10, ctx2k, make_rng(2))
    means = np.array([cycle_rms(s.current, ctx2k.samples_per_cycle).mean() for s in ds.segments])
    y = ds.label_indices()
    for k in range(4):
        assert means[y == k].max() < means[y == k + 1].min()


def test_roundtrip_bitwise(tmp_path, ctx2k):
    ds = generate_dataset(default_signatures(2), 5, ctx2k, make_rng(3))
    path = tmp_path / "d.seg"
    write_segments(ds, path)
    back = read_segments(path, ctx2k)
    assert len(back) == 10 and back.class_names == ds.class_names
    for x, y in zip(ds.segments, back.segments):
        assert x.current.tobytes() == y.current.tobytes()
        assert x.voltage.tobytes() == y.voltage.tobytes()
        assert (x.label, x.timestamp) == (y.label, y.timestamp)


def test_read_three_records(tmp_path, ctx2k):
    ds = generate_dataset([ApplianceSignature("a", 1.0)], 3, ctx2k, make_rng(0))
    write_segments(ds, tmp_path / "three.seg")
    assert len(read_segments(tmp_path / "three.seg", ctx2k)) == 3


def test_read_rejects_short_records(tmp_path):
    ctx16 = make_context(16000, 50, 0.5)
    # a file written under a context with 7999-sample records
    import struct
    path = tmp_path / "short.seg"
    raw = bytearray(b"NILMSEG1")
    raw += struct.pack("<IIII", 16000, 50, 7999, 1)
    raw += struct.pack("<H", 1) + struct.pack("<H", 1) + b"a"
    raw += struct.pack("<Hd", 0, 0.0) + np.zeros(2 * 7999).tobytes()
    path.write_bytes(bytes(raw))
    with pytest.raises(LengthMismatch):
        read_segments(path, ctx16)


def test_read_rejects_garbage(tmp_path, ctx2k):
    p = tmp_path / "bad.seg"
    p.write_bytes(b"not a segment file")
    with pytest.raises(FormatError):
        read_segments(p, ctx2k)


def test_empty_class_rejected(ctx2k):
    seg = EventSegment(np.zeros(1000), np.zeros(1000), ctx2k, "a")
    with pytest.raises(ValueError):
        LabeledDataset([seg], ("a", "b"))
