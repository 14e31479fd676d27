"""Synthetic startup-transient generator and the binary segment file format.

Segment file layout (all integers and floats little-endian)::

    b"NILMSEG1"
    u32 f_s, u32 f_0, u32 samples_per_segment, u32 record_count
    u16 class_count, then per class: u16 byte length + UTF-8 name
    per record: u16 class index, f64 timestamp,
                f64 x N current, f64 x N voltage
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .core import EventSegment, LabeledDataset, Rng, SamplingContext
from .errors import DuplicateClassName, FormatError, LengthMismatch

MAGIC = b"NILMSEG1"
NOMINAL_VOLTAGE_RMS = 230.0

_HEADER = struct.Struct("<IIII")
_U16 = struct.Struct("<H")
_RECORD_HEAD = struct.Struct("<Hd")


@dataclass(frozen=True)
class ApplianceSignature:
    """Parameters of a synthetic appliance's switch-on current.

    ``harmonic_weights[j]`` is the amplitude of odd harmonic ``2*j + 3``
    relative to ``steady_amplitude``.  ``amplitude_jitter`` is the relative
    standard deviation of a per-event gain, modelling unit-to-unit spread.
    """

    name: str
    steady_amplitude: float
    inrush_ratio: float = 1.0
    inrush_decay: float = 0.05
    phase_shift: float = 0.0
    harmonic_weights: tuple[float, ...] = ()
    noise_std: float = 0.0
    amplitude_jitter: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "harmonic_weights", tuple(float(w) for w in self.harmonic_weights))
        if self.steady_amplitude <= 0:
            raise ValueError("steady_amplitude must be > 0")
        if self.inrush_ratio < 1:
            raise ValueError("inrush_ratio must be >= 1")
        if self.inrush_decay <= 0:
            raise ValueError("inrush_decay must be > 0")
        if abs(self.phase_shift) > math.pi / 2 + 1e-12:
            raise ValueError("phase_shift must lie in [-pi/2, pi/2]")
        if self.noise_std < 0 or self.amplitude_jitter < 0:
            raise ValueError("noise_std and amplitude_jitter must be >= 0")


@dataclass(frozen=True, eq=False)
class PowerSeries:
    """Per-appliance active power samples (W) with timestamps (s)."""

    timestamps: np.ndarray
    power: np.ndarray = field(repr=False)

    def __post_init__(self):
        t = np.asarray(self.timestamps, dtype=np.float64)
        p = np.asarray(self.power, dtype=np.float64)
        if t.ndim != 1 or t.shape != p.shape:
            raise LengthMismatch("timestamps and power must be 1-D and equally long")
        if not np.all(np.isfinite(p)):
            raise ValueError("power contains non-finite values")
        if t.size > 1 and not np.all(np.diff(t) > 0):
            raise ValueError("timestamps must be strictly increasing")
        object.__setattr__(self, "timestamps", t)
        object.__setattr__(self, "power", p)

    def __len__(self):
        return self.power.size


def synthesize_current(sig: ApplianceSignature, context: SamplingContext,
                       onset_phase: float = 0.0, gain: float = 1.0,
                       rng: Rng | None = None) -> np.ndarray:
    """Current waveform of one switch-on event.

    The fundamental follows ``1 + (r - 1) * exp(-t / tau)``; harmonics are
    phase-locked to the fundamental at steady amplitude.
    """
    n = context.samples_per_segment
    t = np.arange(n) / context.f_s
    w0 = 2 * np.pi * context.f_0
    amp = sig.steady_amplitude * gain
    envelope = 1.0 + (sig.inrush_ratio - 1.0) * np.exp(-t / sig.inrush_decay)
    arg = w0 * t + onset_phase - sig.phase_shift
    current = amp * envelope * np.sin(arg)
    for j, w in enumerate(sig.harmonic_weights):
        if w:
            current += amp * w * np.sin((2 * j + 3) * arg)
    if sig.noise_std > 0:
        if rng is None:
            raise ValueError("rng required when noise_std > 0")
        current += rng.normal(0.0, sig.noise_std, n)
    return current


def mains_voltage(context: SamplingContext, onset_phase: float = 0.0) -> np.ndarray:
    t = np.arange(context.samples_per_segment) / context.f_s
    return NOMINAL_VOLTAGE_RMS * math.sqrt(2) * np.sin(2 * np.pi * context.f_0 * t + onset_phase)


def generate_dataset(signatures: Sequence[ApplianceSignature], per_class: int,
                     context: SamplingContext, rng: Rng,
                     random_onset: bool = True) -> LabeledDataset:
    """Generate ``per_class`` labeled startup segments for each signature.

    With ``random_onset`` every event starts at a uniformly drawn point of
    the mains cycle (applied to voltage and current alike), as real
    switch-on events do.  ``class_names`` is sorted.
    """
    if per_class < 1:
        raise ValueError("per_class must be >= 1")
    if not signatures:
        raise ValueError("at least one signature is required")
    names = [s.name for s in signatures]
    if len(set(names)) != len(names):
        dup = sorted({n for n in names if names.count(n) > 1})
        raise DuplicateClassName(f"duplicate signature names: {dup}")

    segments = []
    for sig in signatures:
        for _ in range(per_class):
            phase = rng.uniform(0.0, 2 * np.pi) if random_onset else 0.0
            gain = 1.0
            if sig.amplitude_jitter > 0:
                gain = max(0.05, 1.0 + sig.amplitude_jitter * rng.standard_normal())
            current = synthesize_current(sig, context, phase, gain, rng)
            voltage = mains_voltage(context, phase)
            ts = 1.0e9 + 60.0 * len(segments)
            segments.append(EventSegment(current, voltage, context, sig.name, ts))
    return LabeledDataset(tuple(segments), tuple(sorted(names)))


# name, steady A, inrush ratio, decay s, phase rad, odd-harmonic weights (3, 5, 7, ...)
_CATALOG = [
    ("kettle", 9.0, 1.0, 0.05, 0.0, ()),
    ("fridge", 0.8, 6.0, 0.12, 0.9, (0.05,)),
    ("microwave", 5.5, 1.6, 0.03, 0.3, (0.25, 0.08, 0.04)),
    ("laptop", 0.35, 12.0, 0.006, -0.5, (0.75, 0.5, 0.3, 0.15)),
    ("incandescent", 2.6, 9.0, 0.02, 0.0, ()),
    ("hoover", 6.5, 2.8, 0.20, 0.5, (0.12, 0.05)),
    ("tv", 0.6, 4.0, 0.01, -0.3, (0.6, 0.35, 0.2)),
    ("hair_dryer", 4.0, 1.2, 0.05, 0.1, (0.15,)),
    ("washing_machine", 2.0, 3.5, 0.30, 1.1, (0.1, 0.05)),
    ("led_printer", 1.2, 7.0, 0.004, -0.2, (0.4, 0.2)),
    ("toaster", 7.5, 1.05, 0.02, 0.0, ()),
    ("office_fan", 0.25, 2.0, 0.25, 0.7, (0.03,)),
]


def default_signatures(n_classes: int, noise_std: float = 0.02,
                       amplitude_jitter: float = 0.03) -> list[ApplianceSignature]:
    """Return ``n_classes`` well-separated appliance-like signatures.

    The first twelve come from a fixed catalog of household appliances;
    further classes are derived deterministically from it with shifted
    amplitudes.
    """
    if n_classes < 1:
        raise ValueError("n_classes must be >= 1")
    out = []
    for i in range(n_classes):
        name, amp, ratio, decay, phase, harm = _CATALOG[i % len(_CATALOG)]
        rnd = i // len(_CATALOG)
        if rnd:
            name = f"{name}_{rnd + 1}"
            amp *= 1.0 + 0.5 * rnd
        out.append(ApplianceSignature(name, amp, ratio, decay, phase, harm,
                                      noise_std, amplitude_jitter))
    return out


def write_segments(dataset: LabeledDataset, path: str | Path) -> None:
    """Write ``dataset`` to ``path``, replacing any existing file."""
    if len(dataset) == 0:
        raise ValueError("cannot write an empty dataset")
    ctx = dataset.context
    n = ctx.samples_per_segment
    if abs(ctx.segment_duration - n / ctx.f_s) > 1e-12:
        raise ValueError("segment duration is not representable in the file header")
    index = {c: i for i, c in enumerate(dataset.class_names)}
    parts = [MAGIC, _HEADER.pack(ctx.f_s, ctx.f_0, n, len(dataset)),
             _U16.pack(len(dataset.class_names))]
    for name in dataset.class_names:
        raw = name.encode("utf-8")
        parts += [_U16.pack(len(raw)), raw]
    for seg in dataset.segments:
        parts.append(_RECORD_HEAD.pack(index[seg.label], seg.timestamp))
        parts.append(seg.current.astype("<f8").tobytes())
        parts.append(seg.voltage.astype("<f8").tobytes())
    Path(path).write_bytes(b"".join(parts))


def read_segments(path: str | Path, context: SamplingContext) -> LabeledDataset:
    """Read a segment file and validate it against ``context``.

    ``class_names`` of the result is the sorted set of labels present.
    """
    data = Path(path).read_bytes()
    if data[:8] != MAGIC:
        raise FormatError(f"{path}: bad magic {data[:8]!r}")
    pos = 8
    try:
        f_s, f_0, n, count = _HEADER.unpack_from(data, pos)
        pos += _HEADER.size
        (n_classes,) = _U16.unpack_from(data, pos)
        pos += 2
        names = []
        for _ in range(n_classes):
            (ln,) = _U16.unpack_from(data, pos)
            pos += 2
            if pos + ln > len(data):
                raise FormatError("truncated class table")
            names.append(data[pos:pos + ln].decode("utf-8"))
            pos += ln
    except (struct.error, UnicodeDecodeError) as exc:
        raise FormatError(f"{path}: malformed header ({exc})") from exc

    if (f_s, f_0) != (context.f_s, context.f_0):
        raise FormatError(f"{path}: file is {f_s} Hz / {f_0} Hz, context is "
                          f"{context.f_s} Hz / {context.f_0} Hz")
    if n != context.samples_per_segment:
        raise LengthMismatch(f"{path}: {n} samples per segment, expected "
                             f"{context.samples_per_segment}")
    rec_size = _RECORD_HEAD.size + 16 * n
    if len(data) - pos != count * rec_size:
        raise FormatError(f"{path}: expected {count} records of {rec_size} bytes, "
                          f"found {len(data) - pos} bytes")

    segments = []
    for _ in range(count):
        cls, ts = _RECORD_HEAD.unpack_from(data, pos)
        pos += _RECORD_HEAD.size
        if cls >= n_classes:
            raise FormatError(f"{path}: class index {cls} out of range")
        cur = np.frombuffer(data, "<f8", n, pos)
        vol = np.frombuffer(data, "<f8", n, pos + 8 * n)
        pos += 16 * n
        segments.append(EventSegment(cur, vol, context, names[cls], ts))
    return LabeledDataset(tuple(segments), tuple(sorted({s.label for s in segments})))
