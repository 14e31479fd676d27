"""Event-based electrical appliance recognition.

Threshold event detection, startup-segment features, a small numpy
neural-network engine (AE, CAE, CNN), four classical classifiers and a
macro-averaged benchmark harness.
"""

__version__ = "0.1.0"

from .core import EventSegment, LabeledDataset, SamplingContext, make_context, make_rng

__all__ = ["EventSegment", "LabeledDataset", "SamplingContext", "make_context", "make_rng",
           "__version__"]
