"""Hand-crafted electrical features and the raw-waveform baselines.

Every extractor maps one :class:`EventSegment` to a :class:`FeatureVector`;
:func:`extract_matrix` applies an extractor to a whole dataset.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .core import EventSegment, LabeledDataset, Rng
from .errors import DegenerateSignal, DimsTooLarge, EmptyConfig

log = logging.getLogger(__name__)

GROUPS = (
    "active_power",
    "apparent_power",
    "reactive_power",
    "admittance",
    "crest_factor",
    "form_factor",
    "phase_shift",
    "harmonics",
    "thd",
    "spectral_flatness",
    "cycle_rms_stats",
    "max_inrush_ratio",
    "inrush_current_ratio",
)
_SPECTRAL = {"harmonics", "thd", "spectral_flatness"}
_NEEDS_VOLTAGE = {"admittance", "phase_shift"}


@dataclass(frozen=True, eq=False)
class FeatureVector:
    values: np.ndarray
    names: tuple[str, ...]

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "names", tuple(self.names))
        if v.shape != (len(self.names),):
            raise ValueError("values and names differ in length")
        if not np.all(np.isfinite(v)):
            raise ValueError("feature vector contains non-finite values")

    def __len__(self):
        return len(self.names)

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.names, self.values.tolist()))


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    """Row-per-sample feature values with column names and row labels."""

    values: np.ndarray
    names: tuple[str, ...]
    labels: tuple[str, ...]
    class_names: tuple[str, ...] = ()

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2:
            raise ValueError("feature matrix must be 2-D")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "labels", tuple(self.labels))
        if not self.class_names:
            object.__setattr__(self, "class_names", tuple(sorted(set(self.labels))))
        else:
            object.__setattr__(self, "class_names", tuple(self.class_names))
        if v.shape[1] != len(self.names):
            raise ValueError(f"{v.shape[1]} columns but {len(self.names)} names")
        if v.shape[0] != len(self.labels):
            raise ValueError(f"{v.shape[0]} rows but {len(self.labels)} labels")

    @property
    def shape(self):
        return self.values.shape

    def label_indices(self) -> np.ndarray:
        index = {c: i for i, c in enumerate(self.class_names)}
        return np.array([index[l] for l in self.labels], dtype=np.int64)

    def with_values(self, values, names: Sequence[str] | None = None) -> "FeatureMatrix":
        values = np.asarray(values, dtype=np.float64)
        if names is None:
            names = self.names if values.shape[1] == len(self.names) else \
                tuple(f"dim_{j}" for j in range(values.shape[1]))
        return FeatureMatrix(values, names, self.labels, self.class_names)


@dataclass(frozen=True)
class FeatureConfig:
    """Which hand-crafted groups to compute and how many harmonics."""

    groups: tuple[str, ...] = GROUPS
    n_harmonics: int = 15

    def __post_init__(self):
        object.__setattr__(self, "groups", tuple(self.groups))
        unknown = set(self.groups) - set(GROUPS)
        if unknown:
            raise ValueError(f"unknown feature groups: {sorted(unknown)}")
        if self.n_harmonics < 2:
            raise ValueError("n_harmonics must be >= 2")

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureConfig":
        """Build from ``{"groups": {name: bool}, "n_harmonics": int}`` style config."""
        groups = d.get("groups", GROUPS)
        if isinstance(groups, dict):
            groups = tuple(g for g in GROUPS if groups.get(g, True))
        return cls(tuple(groups), int(d.get("n_harmonics", 15)))

    def column_names(self) -> tuple[str, ...]:
        names: list[str] = []
        for g in GROUPS:
            if g not in self.groups:
                continue
            if g == "harmonics":
                names += [f"harmonic_{k}" for k in range(1, self.n_harmonics + 1)]
            elif g == "cycle_rms_stats":
                names += ["cycle_rms_mean", "cycle_rms_std", "cycle_rms_max", "cycle_rms_min"]
            else:
                names.append(g)
        return tuple(names)


def _rms(x: np.ndarray) -> float:
    return float(np.sqrt(np.mean(x * x)))


def _ratio(num: float, den: float, what: str) -> float:
    if den == 0.0:
        log.warning("%s undefined on a silent channel; using 0", what)
        return 0.0
    return num / den


@lru_cache(maxsize=16)
def _harmonic_basis(n: int, n_cycles: int, n_harmonics: int) -> np.ndarray:
    # exact DFT rows at bins k * n_cycles, i.e. frequencies k * f_0
    k = np.arange(1, n_harmonics + 1)[:, None] * n_cycles
    basis = np.exp(-2j * np.pi * k * np.arange(n)[None, :] / n)
    basis.setflags(write=False)
    return basis


def harmonic_phasors(x: np.ndarray, n_cycles: int, n_harmonics: int) -> np.ndarray:
    """Complex amplitudes of ``x`` at multiples 1..n_harmonics of the mains frequency.

    Scaled so that ``A * sin(...)`` at harmonic k has magnitude ``A``.
    """
    x = np.asarray(x, dtype=np.float64)
    return _harmonic_basis(x.size, n_cycles, n_harmonics) @ x * (2.0 / x.size)


def cycle_rms(current: np.ndarray, samples_per_cycle: int) -> np.ndarray:
    c = np.asarray(current, dtype=np.float64).reshape(-1, samples_per_cycle)
    return np.sqrt(np.mean(c * c, axis=1))


def extract_handcrafted(segment: EventSegment, config: FeatureConfig | None = None) -> FeatureVector:
    """Compute the enabled feature groups for one segment.

    Ratio features of an all-zero current are reported as 0.  An all-zero
    voltage raises :class:`DegenerateSignal` when a voltage-normalized group
    (admittance, phase shift) is enabled.
    """
    config = config or FeatureConfig()
    if not config.groups:
        raise EmptyConfig("no feature groups enabled")
    ctx = segment.context
    i, v = segment.current, segment.voltage
    enabled = set(config.groups)
    irms, vrms = _rms(i), _rms(v)
    if vrms == 0.0 and enabled & _NEEDS_VOLTAGE:
        raise DegenerateSignal("voltage channel is all zero")

    spectral = None
    if enabled & _SPECTRAL:
        if config.n_harmonics * ctx.f_0 >= ctx.f_s / 2:
            raise ValueError(f"harmonic {config.n_harmonics} of {ctx.f_0} Hz exceeds "
                             f"Nyquist at f_s={ctx.f_s}")
        spectral = np.abs(harmonic_phasors(i, ctx.n_cycles, config.n_harmonics))

    p = float(np.mean(v * i))
    s = vrms * irms
    values: list[float] = []
    for g in GROUPS:
        if g not in enabled:
            continue
        if g == "active_power":
            values.append(p)
        elif g == "apparent_power":
            values.append(s)
        elif g == "reactive_power":
            values.append(float(np.sqrt(max(s * s - p * p, 0.0))))
        elif g == "admittance":
            values.append(irms / vrms)
        elif g == "crest_factor":
            values.append(_ratio(float(np.max(np.abs(i))), irms, "crest factor"))
        elif g == "form_factor":
            values.append(_ratio(irms, float(np.mean(np.abs(i))), "form factor"))
        elif g == "phase_shift":
            pv = harmonic_phasors(v, ctx.n_cycles, 1)[0]
            pi_ = harmonic_phasors(i, ctx.n_cycles, 1)[0]
            if abs(pi_) == 0.0:
                values.append(0.0)
            else:
                values.append(float(np.angle(pv * np.conj(pi_))))
        elif g == "harmonics":
            h1 = spectral[0]
            if h1 == 0.0:
                log.warning("harmonics undefined without a fundamental; using 0")
                values.extend([0.0] * config.n_harmonics)
            else:
                values.extend((spectral / h1).tolist())
        elif g == "thd":
            values.append(_ratio(float(np.sqrt(np.sum(spectral[1:] ** 2))), float(spectral[0]), "THD"))
        elif g == "spectral_flatness":
            values.append(_spectral_flatness(i, ctx.n_cycles * config.n_harmonics))
        elif g == "cycle_rms_stats":
            r = cycle_rms(i, ctx.samples_per_cycle)
            values += [float(r.mean()), float(r.std()), float(r.max()), float(r.min())]
        elif g == "max_inrush_ratio":
            r = cycle_rms(i, ctx.samples_per_cycle)
            values.append(_ratio(float(r.max()), float(r[-1]), "max-inrush ratio"))
        elif g == "inrush_current_ratio":
            r = cycle_rms(i, ctx.samples_per_cycle)
            values.append(_ratio(float(r[0]), float(r[-1]), "inrush-current ratio"))
    return FeatureVector(np.array(values), config.column_names())


def _spectral_flatness(x: np.ndarray, max_bin: int) -> float:
    mag = np.abs(np.fft.rfft(x))[1:max_bin + 1]
    peak = mag.max() if mag.size else 0.0
    if peak == 0.0:
        log.warning("spectral flatness undefined on a silent channel; using 0")
        return 0.0
    # relative floor keeps the value scale-invariant and finite on pure tones
    mag = np.maximum(mag, 1e-12 * peak)
    return float(np.exp(np.mean(np.log(mag))) / np.mean(mag))


def rms25(segment: EventSegment) -> FeatureVector:
    """Per-mains-cycle RMS of the current (25 values for 0.5 s at 50 Hz)."""
    r = cycle_rms(segment.current, segment.context.samples_per_cycle)
    return FeatureVector(r, tuple(f"cycle_rms_{j}" for j in range(r.size)))


class RandomSubsampler:
    """Fixed random subset of sample indices, shared by every segment it sees.

    Indices are drawn once, without replacement, and kept in ascending order.
    """

    def __init__(self, n_samples: int, dims: int, rng: Rng):
        if dims > n_samples:
            raise DimsTooLarge(f"cannot pick {dims} of {n_samples} samples")
        if dims < 1:
            raise ValueError("dims must be >= 1")
        self.indices = np.sort(rng.choice(n_samples, size=dims, replace=False))
        self.n_samples = n_samples

    def __call__(self, segment: EventSegment) -> FeatureVector:
        if segment.current.size != self.n_samples:
            raise ValueError("segment length differs from the subsampler's")
        return FeatureVector(segment.current[self.indices],
                             tuple(f"sample_{j}" for j in self.indices))


def random_subsample(segment: EventSegment, dims: int, rng: Rng) -> FeatureVector:
    return RandomSubsampler(segment.current.size, dims, rng)(segment)


Extractor = Callable[[EventSegment], FeatureVector]


def handcrafted_extractor(config: FeatureConfig | None = None) -> Extractor:
    config = config or FeatureConfig()
    if not config.groups:
        raise EmptyConfig("no feature groups enabled")
    return lambda seg: extract_handcrafted(seg, config)


def extract_matrix(dataset: LabeledDataset, extractor: Extractor) -> FeatureMatrix:
    """Apply ``extractor`` to every segment; rows follow dataset order."""
    rows = [extractor(seg) for seg in dataset.segments]
    if not rows:
        raise ValueError("dataset is empty")
    names = rows[0].names
    if any(r.names != names for r in rows):
        raise ValueError("extractor produced inconsistent column names")
    return FeatureMatrix(np.stack([r.values for r in rows]), names,
                         tuple(dataset.labels), dataset.class_names)
