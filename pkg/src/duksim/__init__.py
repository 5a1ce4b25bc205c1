"""Spectral simulation and validation harness for a doubly unstable
fourth-order pattern-forming equation with additive noise on the
2*pi-periodic line.

The solution is split into an exactly-sampled stochastic part (per-mode
Ornstein-Uhlenbeck processes) and a regular part advanced by an exponential
integrator; the critical-mode envelopes obey a coupled stochastic amplitude
system whose approximation quality the :mod:`duksim.validate` module
measures at desk scale.
"""

__version__ = "0.1.0"

from .duks import SimConfig, Trajectory, simulate_coupled, simulate_path
from .errors import (
    ConfigurationError,
    DivergenceError,
    InternalConsistencyError,
    SequencingError,
)
from .landau import AmplitudeState, AmplitudeTrajectory, reconstruct_approximation
from .noise import NoiseScaling, OULattice, WienerLattice
from .spectrum import SpectralField, WeightedNormParams, symbol_lambda

__all__ = [
    "AmplitudeState",
    "AmplitudeTrajectory",
    "ConfigurationError",
    "DivergenceError",
    "InternalConsistencyError",
    "NoiseScaling",
    "OULattice",
    "SequencingError",
    "SimConfig",
    "SpectralField",
    "Trajectory",
    "WeightedNormParams",
    "WienerLattice",
    "reconstruct_approximation",
    "simulate_coupled",
    "simulate_path",
    "symbol_lambda",
    "__version__",
]
