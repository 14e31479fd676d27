"""Domain types and seeded randomness used throughout the package.

All randomness goes through :func:`make_rng`, which wraps numpy's Philox
counter-based bit generator.  Philox output depends only on the key and
counter, so a given seed yields the same stream on every platform.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import LengthMismatch, NonIntegralCycles

Rng = np.random.Generator


def make_rng(seed: int, *stream: int | str) -> Rng:
    """Return a Philox generator keyed by ``seed`` and an optional stream path.

    Extra ``stream`` components derive independent child streams, e.g.
    ``make_rng(7, "cnn")``.  Strings are hashed with CRC32 so the mapping is
    stable across interpreter runs.
    """
    if seed < 0 or seed >= 2**64:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    words = [seed]
    for s in stream:
        words.append(zlib.crc32(s.encode("utf-8")) if isinstance(s, str) else int(s))
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(words)))


def child_seed(rng: Rng) -> int:
    """Draw a 63-bit seed from ``rng`` for deriving named sub-streams."""
    return int(rng.integers(0, 2**63 - 1))


@dataclass(frozen=True)
class SamplingContext:
    """Sampling frequency, mains frequency and segment length of a recording."""

    f_s: int
    f_0: int
    segment_duration: float = 0.5

    def __post_init__(self):
        if self.f_s <= 0 or self.f_0 <= 0:
            raise ValueError("f_s and f_0 must be positive")
        if self.segment_duration <= 0:
            raise ValueError("segment_duration must be positive")
        if self.f_s % self.f_0 != 0:
            raise NonIntegralCycles(
                f"f_s={self.f_s} is not a multiple of f_0={self.f_0}")
        cycles = self.segment_duration * self.f_0
        if abs(cycles - round(cycles)) > 1e-9 or round(cycles) == 0:
            raise NonIntegralCycles(
                f"{self.segment_duration} s holds {cycles} cycles of {self.f_0} Hz")

    @property
    def samples_per_cycle(self) -> int:
        return self.f_s // self.f_0

    @property
    def n_cycles(self) -> int:
        """Number of mains cycles per segment (25 for 0.5 s at 50 Hz)."""
        return int(round(self.segment_duration * self.f_0))

    @property
    def samples_per_segment(self) -> int:
        return self.samples_per_cycle * self.n_cycles


def make_context(f_s: int, f_0: int, duration: float = 0.5) -> SamplingContext:
    return SamplingContext(int(f_s), int(f_0), float(duration))


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class EventSegment:
    """Two-channel startup waveform following a switch-on event."""

    current: np.ndarray
    voltage: np.ndarray
    context: SamplingContext
    label: str | None = None
    timestamp: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "current", _frozen(self.current))
        object.__setattr__(self, "voltage", _frozen(self.voltage))
        n = self.context.samples_per_segment
        if self.current.shape != (n,) or self.voltage.shape != (n,):
            raise LengthMismatch(
                f"expected {n} samples per channel, got "
                f"{self.current.shape} / {self.voltage.shape}")
        if not (np.all(np.isfinite(self.current)) and np.all(np.isfinite(self.voltage))):
            raise ValueError("segment contains non-finite samples")

    def with_label(self, label: str) -> "EventSegment":
        return EventSegment(self.current, self.voltage, self.context, label, self.timestamp)

    def __eq__(self, other):
        if not isinstance(other, EventSegment):
            return NotImplemented
        return (self.context == other.context and self.label == other.label
                and self.timestamp == other.timestamp
                and np.array_equal(self.current, other.current)
                and np.array_equal(self.voltage, other.voltage))

    __hash__ = None


@dataclass(frozen=True)
class LabeledDataset:
    segments: tuple[EventSegment, ...]
    class_names: tuple[str, ...]
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        object.__setattr__(self, "class_names", tuple(self.class_names))
        if len(set(self.class_names)) != len(self.class_names):
            raise ValueError("class_names must be unique")
        index = {c: i for i, c in enumerate(self.class_names)}
        counts = np.zeros(len(self.class_names), dtype=int)
        for s in self.segments:
            if s.label not in index:
                raise ValueError(f"segment label {s.label!r} not in class_names")
            counts[index[s.label]] += 1
        empty = [c for c, n in zip(self.class_names, counts) if n == 0]
        if empty:
            raise ValueError(f"classes without segments: {empty}")
        contexts = {s.context for s in self.segments}
        if len(contexts) > 1:
            raise ValueError("all segments must share one sampling context")
        object.__setattr__(self, "_index", index)

    def __len__(self):
        return len(self.segments)

    @property
    def context(self) -> SamplingContext:
        return self.segments[0].context

    @property
    def labels(self) -> list[str]:
        return [s.label for s in self.segments]

    def label_indices(self) -> np.ndarray:
        return np.array([self._index[s.label] for s in self.segments], dtype=np.int64)

    def currents(self) -> np.ndarray:
        """Stack current channels into an (n_segments, n_samples) array."""
        return np.stack([s.current for s in self.segments])

    def voltages(self) -> np.ndarray:
        return np.stack([s.voltage for s in self.segments])

    def subset(self, indices: Sequence[int]) -> "LabeledDataset":
        return LabeledDataset(tuple(self.segments[i] for i in indices), self.class_names)
