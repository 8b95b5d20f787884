"""Time integration of the nonlinear NSAC and modified parabolic systems.

The state is kept as rfft coefficients.  The default integrator is a
second-order integrating-factor Runge-Kutta scheme: the constant
coefficient linear part (acoustics, viscosity, damping, diffusion) is
propagated exactly per mode by the Green symbol, the nonlinear terms are
treated explicitly and evaluated on a 3/2-padded grid.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import GuardViolation, ParameterError, StateValidityError
from .grid import Dealiaser, Grid1D
from .model import (
    PERTURBATION,
    PRIMITIVE,
    ModelParams,
    StateTriple,
    convert_representation,
    nonlinear_terms,
    pressure_eval,
    viscosity_eval,
)
from .spectral import NSAC, PARABOLIC, damped_heat_apply, green_symbol

log = logging.getLogger(__name__)

SEMI_IMPLICIT = "semi-implicit-spectral"
RK4 = "explicit-RK4"


@dataclass(frozen=True)
class SolverConfig:
    dt: float = 0.02
    T: float = 300.0
    integrator: str = SEMI_IMPLICIT
    snapshot_stride: int = 50
    # pointwise bounds in units of vbar (for v) and absolute (for phi)
    v_bounds: tuple[float, float] = (0.5, 2.0)
    phi_bounds: tuple[float, float] = (0.5, 2.0)
    max_amplitude: float | None = None
    dealias: bool = True

    def __post_init__(self):
        if not self.dt > 0 or not self.T > 0:
            raise ParameterError("dt and T must be positive")
        if self.integrator not in (SEMI_IMPLICIT, RK4):
            raise ParameterError(f"unknown integrator {self.integrator!r}")
        if self.snapshot_stride < 1:
            raise ParameterError("snapshot stride must be a positive integer")

    def steps_between(self, t0: float, t1: float) -> int:
        return int(round((t1 - t0) / self.dt))


@dataclass
class Trajectory:
    grid: Grid1D
    params: ModelParams
    form: str
    times: list = field(default_factory=list)
    states: list = field(default_factory=list)
    completed: bool = False

    def append(self, t, state):
        if self.times and not t > self.times[-1]:
            raise ValueError("snapshot times must increase")
        self.times.append(float(t))
        self.states.append(state)

    def perturbations(self) -> list:
        return [s if s.representation == PERTURBATION else convert_representation(s, self.params) for s in self.states]

    def __len__(self):
        return len(self.times)


def _shift_zero_mode(grid: Grid1D, params: ModelParams, sign: float):
    shift = np.zeros((3, grid.N // 2 + 1), dtype=complex)
    shift[:, 0] = sign * grid.N * np.array([params.vbar, params.ubar, 1.0])
    return shift


class _Stepper:
    """Shared machinery: integrating-factor RK2 or plain RK4 on rfft state."""

    system = NSAC

    def __init__(self, grid, params, config: SolverConfig, t0: float = 0.0):
        self.grid, self.params, self.config = grid, params, config
        self.dt = config.dt
        self.t0 = t0
        self.nsteps = 0
        self.ik = 1j * grid.rxi
        self.ik[-1] = 0.0
        self.dealiaser = Dealiaser(grid, 1.5 if config.dealias else 1.0)
        c, nu = params.cbar, params.nubar
        xi = grid.rxi
        self.phi_rate = self._phi_rate() + params.eps * xi**2
        self.E = green_symbol(xi, self.dt, params, self.system)
        self.Ephi = np.exp(-self.phi_rate * self.dt)
        # linear symbol, used by the RK4 path
        diag_n = -0.5 * nu * xi**2 if self.system == PARABOLIC else 0.0 * xi
        diag_w = -0.5 * nu * xi**2 if self.system == PARABOLIC else -nu * xi**2
        self.Lsym = (diag_n, 1j * xi, 1j * c**2 * xi, diag_w)

    @property
    def t(self) -> float:
        return self.t0 + self.nsteps * self.dt

    def _phi_rate(self):
        return self.params.damping

    # subclasses provide self.Z (perturbation rfft, shape (3, K)) and _nonlinear(Z)
    def _propagate(self, Z):
        out = np.empty_like(Z)
        out[:2] = np.einsum("kij,jk->ik", self.E, Z[:2])
        out[2] = self.Ephi * Z[2]
        return out

    def _linear(self, Z):
        a, b, c2, d = self.Lsym
        return np.stack([a * Z[0] + b * Z[1], c2 * Z[0] + d * Z[1], -self.phi_rate * Z[2]])

    def step(self):
        Z, dt = self.Z, self.dt
        if self.config.integrator == SEMI_IMPLICIT:
            N0 = self._nonlinear(Z)
            A = self._propagate(Z + dt * N0)
            N1 = self._nonlinear(A)
            Z = self._propagate(Z + 0.5 * dt * N0) + 0.5 * dt * N1
        else:
            f = lambda y: self._linear(y) + self._nonlinear(y)  # noqa: E731
            k1 = f(Z)
            k2 = f(Z + 0.5 * dt * k1)
            k3 = f(Z + 0.5 * dt * k2)
            k4 = f(Z + dt * k3)
            Z = Z + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        self.Z = Z
        self.nsteps += 1
        self._post_step()

    def _post_step(self):
        pass

    def _guard(self, v, phi):
        vb = self.params.vbar
        lo, hi = self.config.v_bounds
        plo, phi_hi = self.config.phi_bounds
        if not (np.all(np.isfinite(v)) and np.all(np.isfinite(phi))):
            raise GuardViolation(f"non-finite values near t={self.t:.6g}", time=self.t)
        if v.min() < lo * vb or v.max() > hi * vb:
            raise GuardViolation(
                f"specific volume left [{lo * vb}, {hi * vb}] near t={self.t:.6g}: "
                f"range [{v.min():.6g}, {v.max():.6g}]",
                time=self.t,
            )
        if phi.min() < plo or phi.max() > phi_hi:
            raise GuardViolation(
                f"phase left [{plo}, {phi_hi}] near t={self.t:.6g}: range [{phi.min():.6g}, {phi.max():.6g}]",
                time=self.t,
            )

    @property
    def perturbation_hat(self) -> np.ndarray:
        return self.Z

    def perturbation_state(self) -> StateTriple:
        n, w, phi = self.grid.irfft(self.Z)
        return StateTriple(n, w, phi, PERTURBATION)


class NSACStepper(_Stepper):
    """Stepper for the nonlinear NSAC system in perturbation or primitive form."""

    def __init__(self, initial: StateTriple, grid, params, config, form=PERTURBATION, t0=0.0):
        if form not in (PERTURBATION, PRIMITIVE):
            raise ParameterError(f"unknown form {form!r}")
        super().__init__(grid, params, config, t0)
        self.form = form
        pert = initial if initial.representation == PERTURBATION else convert_representation(initial, params)
        self.Z = grid.rfft(pert.as_array())
        self.Z[:, -1] = 0.0
        if form == PRIMITIVE:
            self._shift = _shift_zero_mode(grid, params, 1.0)

    def _nonlinear(self, Z):
        if self.form == PRIMITIVE:
            return self._nonlinear_primitive(Z + self._shift)
        return self._nonlinear_perturbation(Z)

    def _nonlinear_perturbation(self, Z):
        da, ik = self.dealiaser, self.ik
        n, phi = da.to_fine(Z[0]), da.to_fine(Z[2])
        n_x, w_x, phi_x = da.to_fine(np.stack([ik * Z[0], ik * Z[1], ik * Z[2]]))
        self._guard(n + self.params.vbar, phi + 1.0)
        f1, f2, f3, f4, f5 = nonlinear_terms(n, n_x, w_x, phi, phi_x, self.params)
        Fhat, Shat = da.from_fine(np.stack([f1 + f2 + f3, f4 + f5]))
        return np.stack([np.zeros_like(Fhat), ik * Fhat, Shat])

    def _nonlinear_primitive(self, V):
        """Right side of the primitive Lagrangian system minus its linearization."""
        p, da, ik = self.params, self.dealiaser, self.ik
        eps = p.eps
        v, phi = da.to_fine(V[0]), da.to_fine(V[2])
        u_x, phi_x = da.to_fine(np.stack([ik * V[1], ik * V[2]]))
        self._guard(v, phi)
        flux = (
            -pressure_eval(v, p.pressure)[0]
            + viscosity_eval(v, p.viscosity) * u_x
            - eps / 8.0 * phi_x**2 / (phi * v**2)
        )
        q_hat = da.from_fine(phi_x / v)
        q_x = da.to_fine(ik * q_hat)
        source = -2.0 * v / eps * (phi - 1.0) * phi + eps * v * q_x - eps * phi_x**2 / (2.0 * phi)
        flux_hat, source_hat = da.from_fine(np.stack([flux, source]))
        rhs = np.stack([ik * V[1], ik * flux_hat, source_hat])
        return rhs - self._linear(V - self._shift)

    def state(self) -> StateTriple:
        pert = self.perturbation_state()
        return pert if self.form == PERTURBATION else convert_representation(pert, self.params)


class ParabolicStepper(_Stepper):
    """Stepper for the modified parabolic system; the phase is propagated exactly."""

    system = PARABOLIC

    def __init__(self, initial: StateTriple, grid, params, config, t0=0.0):
        super().__init__(grid, params, config, t0)
        pert = initial if initial.representation == PERTURBATION else convert_representation(initial, params)
        self.Z = grid.rfft(pert.as_array())
        self.Z[:, -1] = 0.0
        self._phi0 = pert.phi
        self._phi0_hat = grid.rfft(pert.phi)

    def _phi_rate(self):
        return self.params.eps

    def _nonlinear(self, Z):
        da, ik, p = self.dealiaser, self.ik, self.params
        n = da.to_fine(Z[0])
        self._guard(n + p.vbar, np.ones(1))
        f1 = nonlinear_terms(n, 0.0, 0.0, 0.0, 0.0, p)[0]
        out = np.zeros_like(Z)
        out[1] = ik * da.from_fine(f1)
        return out

    def _post_step(self):
        g = self.grid
        factor = np.exp(-(self.params.eps + self.params.eps * g.rxi**2) * (self.t - self.t0))
        self.Z[2] = factor * self._phi0_hat

    def perturbation_state(self) -> StateTriple:
        n, w = self.grid.irfft(self.Z[:2])
        phi = damped_heat_apply(self._phi0, self.grid, self.t - self.t0, self.params.eps, self.params.eps)
        return StateTriple(n, w, phi, PERTURBATION)

    def state(self) -> StateTriple:
        return self.perturbation_state()


Observer = Callable[[float, _Stepper], None]


def _check_initial(initial: StateTriple, params: ModelParams, config: SolverConfig):
    prim = initial if initial.representation == PRIMITIVE else convert_representation(initial, params)
    v, phi = np.asarray(prim.v), np.asarray(prim.phi)
    lo, hi = config.v_bounds
    plo, phi_hi = config.phi_bounds
    if not (np.all(v > lo * params.vbar) and np.all(v < hi * params.vbar)):
        raise StateValidityError("initial specific volume violates the pointwise bounds")
    if not (np.all(phi > plo) and np.all(phi < phi_hi)):
        raise StateValidityError("initial phase field violates the pointwise bounds")
    if config.max_amplitude is not None:
        pert = initial if initial.representation == PERTURBATION else convert_representation(initial, params)
        amp = float(np.max(np.abs(pert.as_array())))
        if amp > config.max_amplitude:
            raise StateValidityError(f"initial amplitude {amp:.3g} exceeds configured {config.max_amplitude}")


def _run(stepper, config: SolverConfig, traj: Trajectory, observers: Sequence[Observer], store):
    def snapshot(persist=True):
        state = stepper.state()
        traj.append(stepper.t, state)
        if store is not None and persist:
            store.write(stepper.t, state)

    for obs in observers:
        obs(stepper.t, stepper)
    # a resumed run starts from the store's last snapshot; do not duplicate it
    snapshot(persist=store is None or len(store) == 0 or stepper.t0 == 0.0)
    nsteps = config.steps_between(stepper.t0, config.T)
    try:
        for k in range(1, nsteps + 1):
            stepper.step()
            for obs in observers:
                obs(stepper.t, stepper)
            if k % config.snapshot_stride == 0 or k == nsteps:
                snapshot()
    except GuardViolation as exc:
        log.warning("run aborted: %s", exc)
        exc.trajectory = traj
        raise
    traj.completed = True
    return traj


def evolve_nonlinear(
    initial: StateTriple,
    grid: Grid1D,
    params: ModelParams,
    config: SolverConfig,
    form: str = PERTURBATION,
    observers: Iterable[Observer] = (),
    store=None,
    t0: float = 0.0,
) -> Trajectory:
    """Integrate the NSAC system from ``t0`` to ``config.T``."""
    _check_initial(initial, params, config)
    stepper = NSACStepper(initial, grid, params, config, form, t0)
    return _run(stepper, config, Trajectory(grid, params, form), list(observers), store)


def evolve_parabolic(
    initial: StateTriple,
    grid: Grid1D,
    params: ModelParams,
    config: SolverConfig,
    observers: Iterable[Observer] = (),
    store=None,
    t0: float = 0.0,
) -> Trajectory:
    """Integrate the modified parabolic system (perturbation variables)."""
    _check_initial(initial, params, config)
    stepper = ParabolicStepper(initial, grid, params, config, t0)
    return _run(stepper, config, Trajectory(grid, params, PERTURBATION), list(observers), store)


def evolve_linear(W0, grid: Grid1D, t: float, params: ModelParams, which: str = NSAC):
    """Exact solution of the linearized acoustic pair at time ``t``."""
    n0, w0 = W0
    W = grid.rfft(np.stack([np.asarray(n0, float), np.asarray(w0, float)]))
    G = green_symbol(grid.rxi, t, params, which)
    n, w = grid.irfft(np.einsum("kij,jk->ik", G, W))
    return n, w


def evolve_linear_state(initial: StateTriple, grid: Grid1D, t: float, params: ModelParams, which: str = NSAC):
    """Linear evolution of a full perturbation triple (acoustics plus damped heat)."""
    pert = initial if initial.representation == PERTURBATION else convert_representation(initial, params)
    n, w = evolve_linear((pert.v, pert.u), grid, t, params, which)
    rate = params.damping if which == NSAC else params.eps
    phi = damped_heat_apply(pert.phi, grid, t, rate, params.eps)
    return StateTriple(n, w, phi, PERTURBATION)


def primitive_rhs(state: StateTriple, grid: Grid1D, params: ModelParams) -> StateTriple:
    """Time derivative from the Lagrangian primitive equations (no dealiasing)."""
    from .grid import spectral_derivative as D

    s = state if state.representation == PRIMITIVE else convert_representation(state, params)
    v, u, phi = s.v, s.u, s.phi
    eps = params.eps
    phi_x = D(phi, grid)
    flux = -pressure_eval(v, params.pressure)[0] + viscosity_eval(v, params.viscosity) * D(u, grid)
    flux = flux - eps / 8 * phi_x**2 / (phi * v**2)
    phi_t = -2 * v / eps * (phi - 1) * phi + eps * v * D(phi_x / v, grid) - eps * phi_x**2 / (2 * phi)
    return StateTriple(D(u, grid), D(flux, grid), phi_t, PERTURBATION)


def perturbation_rhs(state: StateTriple, grid: Grid1D, params: ModelParams) -> StateTriple:
    """Time derivative from the perturbation equations with the f-terms."""
    from .grid import spectral_derivative as D

    s = state if state.representation == PERTURBATION else convert_representation(state, params)
    n, w, phi = s.v, s.u, s.phi
    c2, nu, eps = params.cbar**2, params.nubar, params.eps
    n_x, w_x, phi_x = D(n, grid), D(w, grid), D(phi, grid)
    f1, f2, f3, f4, f5 = nonlinear_terms(n, n_x, w_x, phi, phi_x, params)
    w_t = c2 * n_x + nu * D(w, grid, 2) + D(f1 + f2 + f3, grid)
    phi_t = -params.damping * phi + eps * D(phi, grid, 2) + f4 + f5
    return StateTriple(w_x, w_t, phi_t, PERTURBATION)
