"""Minimal numpy neural-network engine for the AE, CAE and CNN models."""

from .architectures import (FactorVector, build_ae, build_cae, build_cnn, build_from_config,
                            derive_cnn_architecture, prime_factors, scale_config)
from .config import PRESETS, Architecture, NetConfig, preset, preset_context
from .network import Network
from .training import TrainingHistory, encode, predict_cnn, predict_proba, train_network

__all__ = [
    "Architecture", "FactorVector", "NetConfig", "Network", "PRESETS", "TrainingHistory",
    "build_ae", "build_cae", "build_cnn", "build_from_config", "derive_cnn_architecture",
    "encode", "predict_cnn", "predict_proba", "preset", "preset_context", "prime_factors",
    "scale_config", "train_network",
]
