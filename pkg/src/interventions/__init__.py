"""Measurement-and-control interventions: classical Gaussian ledgers, grid
Markov kernels, Monte Carlo trials, a truncated-Fock oscillator engine and
a Gaussian covariance backend for the collision model."""

__version__ = "0.1.0"

from .errors import InterventionError  # noqa: E402
from .gaussian import (  # noqa: E402
    GaussianMoment,
    MeasurementModel,
    SystemContext,
    ThermoLedger,
    equivalent_pair,
    intervention_ledger,
)

__all__ = [
    "__version__",
    "InterventionError",
    "GaussianMoment",
    "MeasurementModel",
    "SystemContext",
    "ThermoLedger",
    "equivalent_pair",
    "intervention_ledger",
]
