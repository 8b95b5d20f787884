"""Decay of small perturbations in the 1-D compressible Navier-Stokes/Allen-Cahn system.

Pseudo-spectral solvers for the Lagrangian NSAC system and its modified
parabolic comparison system, exact Green-symbol propagators, energy
functionals, and decay-rate fitting.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    CertificationError,
    ConfigError,
    ConstitutiveLawError,
    DomainError,
    FitError,
    GuardViolation,
    NSACError,
    ParameterError,
    SingularKernelError,
    StateValidityError,
)
from .model import ModelParams, PressureLaw, StateTriple, ViscosityLaw  # noqa: E402
from .grid import Grid1D, norm, spectral_derivative  # noqa: E402
from .spectral import green_symbol, green_tilde_physical, regime_check  # noqa: E402
from .solver import SolverConfig, evolve_linear, evolve_nonlinear, evolve_parabolic  # noqa: E402
from .decay import NormSeries, DecayReport, fit_rate, floor_correct  # noqa: E402

__all__ = [
    "__version__",
    "CertificationError", "ConfigError", "ConstitutiveLawError", "DomainError", "FitError",
    "GuardViolation", "NSACError", "ParameterError", "SingularKernelError", "StateValidityError",
    "ModelParams", "PressureLaw", "StateTriple", "ViscosityLaw",
    "Grid1D", "norm", "spectral_derivative",
    "green_symbol", "green_tilde_physical", "regime_check",
    "SolverConfig", "evolve_linear", "evolve_nonlinear", "evolve_parabolic",
    "NormSeries", "DecayReport", "fit_rate", "floor_correct",
]
