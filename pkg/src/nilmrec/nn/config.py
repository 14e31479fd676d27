"""Network hyperparameters and the named best-architecture presets."""

from __future__ import annotations

import dataclasses
import enum
from dataclasses import dataclass

from ..core import SamplingContext, make_context
from ..transform import NormKind


class Architecture(str, enum.Enum):
    AE = "ae"
    CAE = "cae"
    CNN = "cnn"


@dataclass(frozen=True)
class NetConfig:
    """Hyperparameters of one AE, CAE or CNN model.

    ``factors`` is the per-layer dimension scale: width divisors for the AE,
    pool sizes for the CAE encoder and the CNN.  An empty tuple on a CNN
    means "derive from the sampling context".
    """

    architecture: Architecture
    factors: tuple[float, ...] = ()
    batch_norm: bool = True
    leaky_slope: float = 0.01
    l2: float = 0.0
    input_norm: NormKind = NormKind.VARIANCE
    learning_rate: float = 1e-3
    batch_size: int = 30
    input_noise_std: float = 0.0
    optimizer: str = "adam"
    loss: str = "mse"
    epochs: int = 200
    patience: int = 10
    channels: tuple[int, ...] | None = None
    use_voltage: bool = False

    def __post_init__(self):
        object.__setattr__(self, "architecture", Architecture(self.architecture))
        object.__setattr__(self, "input_norm", NormKind(self.input_norm))
        object.__setattr__(self, "factors", tuple(self.factors))
        object.__setattr__(self, "optimizer", self.optimizer.lower())
        object.__setattr__(self, "loss", self.loss.lower())
        if self.channels is not None:
            object.__setattr__(self, "channels", tuple(int(c) for c in self.channels))
        if self.learning_rate <= 0 or self.batch_size < 1 or self.epochs < 1:
            raise ValueError("learning_rate, batch_size and epochs must be positive")
        if self.l2 < 0 or self.input_noise_std < 0 or self.patience < 0:
            raise ValueError("l2, input_noise_std and patience must be non-negative")
        if self.optimizer not in ("adam", "sgd"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")
        if self.loss not in ("mse", "categorical_cross_entropy"):
            raise ValueError(f"unknown loss {self.loss!r}")
        is_cnn = self.architecture is Architecture.CNN
        if is_cnn != (self.loss == "categorical_cross_entropy"):
            raise ValueError("cross-entropy is the CNN loss; AE and CAE use MSE")
        if any(f <= 1 for f in self.factors):
            raise ValueError("factors must be > 1")

    def replace(self, **changes) -> "NetConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["architecture"] = self.architecture.value
        d["input_norm"] = self.input_norm.value
        d["factors"] = list(self.factors)
        d["channels"] = None if self.channels is None else list(self.channels)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "NetConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown NetConfig keys: {sorted(unknown)}")
        d = dict(d)
        if d.get("channels") is not None:
            d["channels"] = tuple(d["channels"])
        d["factors"] = tuple(d.get("factors", ()))
        return cls(**d)


UKDALE_CONTEXT = make_context(16000, 50, 0.5)
BLOND_CONTEXT = make_context(50000, 50, 0.5)

_AE = dict(architecture="ae", batch_norm=True, l2=1e-5, input_norm="variance",
           learning_rate=1e-4, input_noise_std=0.005, optimizer="adam", loss="mse")
_CAE = dict(architecture="cae", batch_norm=True, l2=0.0, input_norm="variance",
            learning_rate=1e-3, batch_size=45, loss="mse")
_CNN = dict(architecture="cnn", batch_norm=True, l2=0.0, input_norm="variance",
            learning_rate=1e-3, batch_size=30, optimizer="sgd", loss="categorical_cross_entropy")

PRESETS: dict[str, tuple[NetConfig, SamplingContext]] = {
    "ukdale-ae": (NetConfig(factors=(2, 4, 5), batch_size=30, **_AE), UKDALE_CONTEXT),
    "blond-ae": (NetConfig(factors=(10, 5, 2.5), batch_size=45, **_AE), BLOND_CONTEXT),
    "ukdale-cae": (NetConfig(factors=(5, 4, 2), optimizer="adam", **_CAE), UKDALE_CONTEXT),
    "blond-cae": (NetConfig(factors=(5, 5, 5), optimizer="sgd", **_CAE), BLOND_CONTEXT),
    "ukdale-cnn": (NetConfig(factors=(5, 2, 2, 2, 2, 2, 2), **_CNN), UKDALE_CONTEXT),
    # the derivation rule gives [5,5,5,2,2,2] for 50 kHz / 50 Hz
    "blond-cnn": (NetConfig(factors=(5, 5, 5, 2, 2, 2), **_CNN), BLOND_CONTEXT),
}


def preset(name: str) -> NetConfig:
    try:
        return PRESETS[name][0]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


def preset_context(name: str) -> SamplingContext:
    return PRESETS[name][1]
