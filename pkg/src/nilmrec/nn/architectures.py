"""Builders for the dense autoencoder, convolutional autoencoder and end-to-end CNN."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import prod

from ..core import SamplingContext
from ..errors import NonIntegralWidth
from .config import Architecture, NetConfig
from .layers import (BatchNorm, Conv1D, Dense, Flatten, GaussianNoise, LeakyReLU,
                     MaxPool1D, Softmax, Upsample1D)
from .network import Network


def prime_factors(n: int) -> list[int]:
    """Prime factorization by trial division, ascending with multiplicity."""
    if n < 1:
        raise ValueError("n must be positive")
    out, p = [], 2
    while p * p <= n:
        while n % p == 0:
            out.append(p)
            n //= p
        p += 1
    if n > 1:
        out.append(n)
    return out


@dataclass(frozen=True)
class FactorVector:
    """Per-block pool sizes, sorted descending; their product is f_s / f_0."""

    factors: tuple[int, ...]

    @property
    def n_layers(self) -> int:
        return len(self.factors)

    @property
    def product(self) -> int:
        return prod(self.factors)

    def __iter__(self):
        return iter(self.factors)


def derive_cnn_architecture(context: SamplingContext) -> FactorVector:
    """Pool sizes that reduce a segment to exactly one value per mains cycle."""
    return FactorVector(tuple(sorted(prime_factors(context.samples_per_cycle), reverse=True)))


def kernel_for(factor: int) -> int:
    return 2 * int(factor) + 1


def default_channels(n_blocks: int, start: int = 8, cap: int = 64) -> tuple[int, ...]:
    return tuple(min(start * 2 ** j, cap) for j in range(n_blocks))


def _block(layers, config: NetConfig):
    if config.batch_norm:
        layers.append(BatchNorm())
    layers.append(LeakyReLU(config.leaky_slope))


def ae_widths(input_dim: int, factors) -> list[int]:
    widths = [Fraction(input_dim)]
    for f in factors:
        widths.append(widths[-1] / Fraction(str(f)))
    if any(w.denominator != 1 or w < 1 for w in widths):
        raise NonIntegralWidth(f"{input_dim} cannot be divided by {list(factors)} into integer widths: "
                               f"{[float(w) for w in widths]}")
    return [int(w) for w in widths]


def build_ae(input_dim: int, encode_factors, config: NetConfig) -> Network:
    """Fully connected autoencoder with a mirrored decoder.

    Encoder widths are ``input_dim / prod(factors[:j])``; factors may be
    rational as long as every width comes out integral.
    """
    widths = ae_widths(input_dim, encode_factors)
    layers = []
    if config.input_noise_std > 0:
        layers.append(GaussianNoise(config.input_noise_std))
    for w in widths[1:]:
        layers.append(Dense(w))
        _block(layers, config)
    coding_index = len(layers) - 1
    for w in reversed(widths[1:-1]):
        layers.append(Dense(w))
        _block(layers, config)
    layers.append(Dense(input_dim))
    return Network(layers, (input_dim,), Architecture.AE.value, coding_index=coding_index)


def _in_channels(config: NetConfig) -> int:
    return 2 if config.use_voltage else 1


def build_cae(context: SamplingContext, pool_factors, config: NetConfig) -> Network:
    """Three conv/pool encoder blocks, a one-channel coding conv, mirrored decoder."""
    n = context.samples_per_segment
    pool_factors = [int(f) for f in pool_factors]
    if n % prod(pool_factors):
        raise NonIntegralWidth(f"segment length {n} is not divisible by {pool_factors}")
    channels = config.channels or default_channels(len(pool_factors), 8, 16)
    if len(channels) != len(pool_factors):
        raise ValueError("one channel count per pool factor is required")
    c_in = _in_channels(config)
    layers = []
    if config.input_noise_std > 0:
        layers.append(GaussianNoise(config.input_noise_std))
    for f, ch in zip(pool_factors, channels):
        layers.append(Conv1D(ch, kernel_for(f)))
        _block(layers, config)
        layers.append(MaxPool1D(f))
    layers.append(Conv1D(1, 1))
    _block(layers, config)
    coding_index = len(layers) - 1
    for f, ch in zip(reversed(pool_factors), reversed(channels)):
        layers.append(Upsample1D(f))
        layers.append(Conv1D(ch, kernel_for(f)))
        _block(layers, config)
    layers.append(Conv1D(c_in, 1))
    return Network(layers, (c_in, n), Architecture.CAE.value, coding_index=coding_index)


def build_cnn(context: SamplingContext, factors, n_classes: int, config: NetConfig) -> Network:
    """End-to-end classifier: one conv/pool block per factor, then dense softmax."""
    if n_classes < 2:
        raise ValueError("n_classes must be >= 2")
    factors = [int(f) for f in (factors if factors is not None else derive_cnn_architecture(context))]
    n = context.samples_per_segment
    if n % prod(factors):
        raise NonIntegralWidth(f"segment length {n} is not divisible by {factors}")
    channels = config.channels or default_channels(len(factors))
    if len(channels) != len(factors):
        raise ValueError("one channel count per factor is required")
    layers = []
    if config.input_noise_std > 0:
        layers.append(GaussianNoise(config.input_noise_std))
    for f, ch in zip(factors, channels):
        layers.append(Conv1D(ch, kernel_for(f)))
        _block(layers, config)
        layers.append(MaxPool1D(f))
    layers += [Flatten(), Dense(n_classes), Softmax()]
    return Network(layers, (_in_channels(config), n), Architecture.CNN.value, n_classes=n_classes)


def build_from_config(config: NetConfig, context: SamplingContext, n_classes: int | None = None) -> Network:
    if config.architecture is Architecture.AE:
        return build_ae(context.samples_per_segment * _in_channels(config), config.factors, config)
    if config.architecture is Architecture.CAE:
        return build_cae(context, config.factors, config)
    factors = config.factors or derive_cnn_architecture(context).factors
    return build_cnn(context, factors, n_classes, config)


def scale_config(config: NetConfig, context: SamplingContext, epochs: int | None = None) -> NetConfig:
    """Adapt a preset to another sampling context.

    CNN pool sizes are re-derived for ``context``; AE/CAE factors are kept
    and must still divide the new segment length.  ``epochs`` caps training.
    """
    changes = {}
    if config.architecture is Architecture.CNN:
        changes["factors"] = derive_cnn_architecture(context).factors
    if epochs is not None:
        changes["epochs"] = min(config.epochs, epochs)
    return config.replace(**changes)
