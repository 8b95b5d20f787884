"""Constitutive laws, derived constants and variable transforms.

The Lagrangian system is written for the specific volume ``v``, the
velocity ``u`` and the squared phase field ``phi = chi**2``.  Perturbations
around the constant state ``(vbar, ubar, 1)`` are ``(n, w, phi')``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.interpolate import Akima1DInterpolator

from .errors import ConstitutiveLawError, DomainError, StateValidityError

PRIMITIVE = "primitive"
PERTURBATION = "perturbation"


@dataclass(frozen=True)
class PressureLaw:
    """Power law ``p(v) = a * v**(-gamma)``."""

    a: float = 0.5
    gamma: float = 2.0

    def __post_init__(self):
        if not self.a > 0:
            raise ConstitutiveLawError(f"pressure amplitude must be positive, got {self.a}")
        if not self.gamma > 1:
            raise ConstitutiveLawError(f"pressure exponent must exceed 1, got {self.gamma}")


@dataclass(frozen=True)
class ViscosityLaw:
    """Either ``nu(v) = mu`` or ``nu(v) = mu / v``."""

    variant: Literal["constant", "inverse-volume"] = "inverse-volume"
    mu: float = 1.0

    def __post_init__(self):
        if self.variant not in ("constant", "inverse-volume"):
            raise ConstitutiveLawError(f"unknown viscosity variant {self.variant!r}")
        if not self.mu > 0:
            raise ConstitutiveLawError(f"viscosity coefficient must be positive, got {self.mu}")


def _check_positive(v):
    v = np.asarray(v, dtype=float)
    if np.any(~(v > 0)):
        raise DomainError("specific volume must be positive")
    return v


def pressure_eval(v, law: PressureLaw):
    """Return ``(p, p', p'')`` at ``v``."""
    v = _check_positive(v)
    a, g = law.a, law.gamma
    p = a * v ** (-g)
    return p, -g * p / v, g * (g + 1) * p / v**2


def viscosity_eval(v, law: ViscosityLaw):
    v = _check_positive(v)
    if law.variant == "constant":
        return np.full_like(v, law.mu) if v.ndim else np.float64(law.mu)
    return law.mu / v


@dataclass(frozen=True)
class ModelParams:
    """Physical constants of the Lagrangian NSAC model."""

    eps: float = 1.0
    vbar: float = 1.0
    ubar: float = 0.0
    pressure: PressureLaw = field(default_factory=PressureLaw)
    viscosity: ViscosityLaw = field(default_factory=ViscosityLaw)

    def __post_init__(self):
        if not self.eps > 0:
            raise ConstitutiveLawError("interface thickness eps must be positive")
        if not self.vbar > 0:
            raise ConstitutiveLawError("reference specific volume must be positive")
        if not pressure_eval(self.vbar, self.pressure)[1] < 0:
            raise ConstitutiveLawError("p'(vbar) must be negative")

    @property
    def cbar(self) -> float:
        return sound_speed(self)

    @property
    def nubar(self) -> float:
        return float(viscosity_eval(self.vbar, self.viscosity))

    @property
    def damping(self) -> float:
        """Linear damping rate ``2 vbar / eps`` of the phase perturbation."""
        return 2.0 * self.vbar / self.eps

    @property
    def eta(self) -> float:
        return min(self.damping, self.eps)

    def eta_bar(self, alpha: float) -> float:
        return min(self.damping - alpha, self.eps)

    def with_(self, **changes) -> "ModelParams":
        return replace(self, **changes)


def sound_speed(params: ModelParams) -> float:
    dp = float(pressure_eval(params.vbar, params.pressure)[1])
    if dp >= 0:
        raise ConstitutiveLawError(f"p'(vbar) = {dp} is not negative")
    return float(np.sqrt(-dp))


def nonlinear_terms(n, n_x, w_x, phi, phi_x, params: ModelParams):
    """Pointwise ``(f1, f2, f3, f4, f5)`` of the perturbation system.

    ``f1 + f2 + f3`` is the flux correction of the momentum equation,
    ``f4 + f5`` the source of the phase equation.
    """
    n = np.asarray(n, dtype=float)
    phi = np.asarray(phi, dtype=float)
    v = n + params.vbar
    if np.any(~(v > 0)):
        raise StateValidityError("vacuum: n + vbar <= 0")
    if np.any(~(phi + 1 > 0)):
        raise StateValidityError("degenerate phase: phi + 1 <= 0")
    eps, vbar = params.eps, params.vbar
    p, dp, _ = pressure_eval(v, params.pressure)
    p0, dp0, _ = pressure_eval(vbar, params.pressure)
    f1 = -p + p0 + dp0 * n
    f2 = (viscosity_eval(v, params.viscosity) - params.nubar) * w_x
    f3 = -eps * phi_x**2 / (8.0 * (phi + 1.0) * v**2)
    f4 = -eps * n_x * phi_x / v - 2.0 * n * (phi**2 + phi) / eps
    f5 = -eps * phi_x**2 / (2.0 * (phi + 1.0)) - 2.0 * vbar * phi**2 / eps
    return f1, f2, f3, f4, f5


def pressure_potential(n, params: ModelParams):
    """``A(n) = p(vbar) n - int_vbar^{vbar+n} p(s) ds`` in closed form."""
    n = np.asarray(n, dtype=float)
    vbar = params.vbar
    if np.any(~(vbar + n > 0)):
        raise DomainError("vacuum: vbar + n <= 0")
    a, g = params.pressure.a, params.pressure.gamma
    # primitive of a s^-g is a s^(1-g) / (1-g); expm1 keeps small n accurate
    ratio = np.log1p(n / vbar)
    integral = a * vbar ** (1 - g) * np.expm1((1 - g) * ratio) / (1 - g)
    return a * vbar ** (-g) * n - integral


@dataclass(frozen=True)
class StateTriple:
    """Three sampled fields; slots hold (v, u, phi) or (n, w, phi')."""

    v: np.ndarray
    u: np.ndarray
    phi: np.ndarray
    representation: Literal["primitive", "perturbation"] = PRIMITIVE

    def __post_init__(self):
        if self.representation not in (PRIMITIVE, PERTURBATION):
            raise ValueError(f"unknown representation {self.representation!r}")
        shapes = {np.shape(self.v), np.shape(self.u), np.shape(self.phi)}
        if len(shapes) != 1:
            raise ValueError("field shapes differ")

    def as_array(self) -> np.ndarray:
        return np.stack([self.v, self.u, self.phi])

    def check_bounds(self, params: ModelParams) -> None:
        """Raise if the pointwise bounds ``vbar/2 <= v <= 2 vbar``, ``1/2 <= phi <= 2`` fail."""
        s = self if self.representation == PRIMITIVE else convert_representation(self, params)
        vb = params.vbar
        if not np.all(np.isfinite(s.as_array())):
            raise StateValidityError("non-finite values in state")
        if s.v.min() < vb / 2 or s.v.max() > 2 * vb:
            raise StateValidityError(
                f"specific volume out of [{vb / 2}, {2 * vb}]: [{s.v.min()}, {s.v.max()}]"
            )
        if s.phi.min() < 0.5 or s.phi.max() > 2.0:
            raise StateValidityError(f"phase out of [0.5, 2]: [{s.phi.min()}, {s.phi.max()}]")


def convert_representation(state: StateTriple, params: ModelParams) -> StateTriple:
    """Switch between primitive and perturbation variables."""
    sign = -1.0 if state.representation == PRIMITIVE else 1.0
    target = PERTURBATION if state.representation == PRIMITIVE else PRIMITIVE
    return StateTriple(
        np.asarray(state.v) + sign * params.vbar,
        np.asarray(state.u) + sign * params.ubar,
        np.asarray(state.phi) + sign * 1.0,
        target,
    )


@dataclass(frozen=True)
class LagrangianData:
    x: np.ndarray
    v: np.ndarray
    u: np.ndarray
    phi: np.ndarray


def eulerian_to_lagrangian(x_e, rho0, u0, chi0, num_points: int | None = None) -> LagrangianData:
    """Map initial data to the mass coordinate ``x = int_{x_e[0]} rho0``.

    Returns ``v0 = 1/rho0``, ``u0`` and ``phi0 = chi0**2`` resampled on a
    uniform mass grid (same point count as the input unless given).
    """
    x_e = np.asarray(x_e, dtype=float)
    rho0 = np.asarray(rho0, dtype=float)
    if np.any(~(rho0 > 0)):
        raise DomainError("density must be positive")
    mass = cumulative_trapezoid(rho0, x_e, initial=0.0)
    m = len(x_e) if num_points is None else num_points
    x = np.linspace(0.0, mass[-1], m)
    resample = lambda f: Akima1DInterpolator(mass, np.asarray(f, dtype=float))(x)  # noqa: E731
    return LagrangianData(x, resample(1.0 / rho0), resample(u0), resample(np.asarray(chi0) ** 2))
