"""Simulation of entangled and unentangled quantum sensors for stochastic,
correlated phase parameters."""

__version__ = "0.1.0"

from . import distributions, featmat, inference, protocols, qsim, xxz  # noqa: E402,F401
