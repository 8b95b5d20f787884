"""Energy functionals of the perturbation system.

All quantities are computed from rfft coefficients through Parseval, so a
per-step monitor costs no transforms.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .grid import Grid1D, derivative_symbol, hs_sq_hat, inner_hat

# share of the D^s energy allowed in the top third of the spectrum
RESOLUTION_TOL = 1e-6


@dataclass
class EnergyRecord:
    t: float
    E: np.ndarray  # E_l^s for l = 0..s
    M: float
    lyapunov: float
    dissipation: float
    Ebar: np.ndarray | None = None  # difference energies, k = 0..s-1


def check_resolution(Zhat, grid: Grid1D, s: int):
    if s < 3:
        raise ParameterError(f"Sobolev index must be at least 3, got {s}")
    w = np.abs(derivative_symbol(grid, s)) ** 2 * np.abs(np.atleast_2d(Zhat)) ** 2
    total = w.sum()
    if total == 0:
        return
    tail = w[..., 2 * w.shape[-1] // 3 :].sum()
    if tail > RESOLUTION_TOL * total:
        raise ParameterError(
            f"grid does not resolve {s} derivatives: {tail / total:.2e} of the D^{s} energy sits in the top third of modes"
        )


def energy_levels(Zhat, grid: Grid1D, s: int) -> np.ndarray:
    """``E_l^s = ||D^l n||^2_{H^{s-l}} + ||D^l w||^2 + ||D^l phi||^2`` for l = 0..s."""
    return np.array([np.sum(hs_sq_hat(Zhat, grid, s, start=l)) for l in range(s + 1)])


def lyapunov(Zhat, grid: Grid1D, s: int, beta1: float) -> float:
    """``||(n,w,phi)||^2_{H^s} - beta1 sum_{l=1}^s int D^{l-1} w D^l n dx``."""
    n, w, _ = Zhat
    cross = sum(inner_hat(derivative_symbol(grid, l - 1) * w, derivative_symbol(grid, l) * n, grid) for l in range(1, s + 1))
    return float(np.sum(hs_sq_hat(Zhat, grid, s)) - beta1 * cross)


def dissipation(Zhat, grid: Grid1D, s: int) -> float:
    """``||w_x||^2_{H^s} + ||phi||^2_{H^{s+1}} + ||n_x||^2_{H^{s-1}}``."""
    n, w, phi = Zhat
    return float(hs_sq_hat(w, grid, s + 1, start=1) + hs_sq_hat(phi, grid, s + 1) + hs_sq_hat(n, grid, s, start=1))


def difference_levels(Zhat, Zref, grid: Grid1D, s: int) -> np.ndarray:
    """``Ebar_k^s`` for k = 0..s-1 (acoustic channels only)."""
    d = np.asarray(Zhat)[:2] - np.asarray(Zref)[:2]
    return np.array([np.sum(hs_sq_hat(d, grid, s - 1, start=k)) for k in range(s)])


def energy_diagnostics(trajectory, s: int = 3, beta1: float = 0.05, reference=None) -> list[EnergyRecord]:
    """Energy records for every snapshot of a trajectory.

    ``reference`` is an optional parabolic trajectory with the same
    snapshot times, used for the difference energies.
    """
    grid = trajectory.grid
    perts = trajectory.perturbations()
    refs = reference.perturbations() if reference is not None else None
    if refs is not None and (len(reference.times) != len(trajectory.times) or not np.allclose(reference.times, trajectory.times)):
        raise ParameterError("reference trajectory has different snapshot times")
    records, M = [], 0.0
    for i, (t, st) in enumerate(zip(trajectory.times, perts)):
        Z = grid.rfft(st.as_array())
        if i == 0:
            check_resolution(Z, grid, s)
        nw = np.sqrt(hs_sq_hat(Z[:2], grid, s))
        M = max(M, (1 + t) ** 0.25 * float(nw.sum()))
        Ebar = difference_levels(Z, grid.rfft(refs[i].as_array()), grid, s) if refs is not None else None
        records.append(EnergyRecord(t, energy_levels(Z, grid, s), M, lyapunov(Z, grid, s, beta1), dissipation(Z, grid, s), Ebar))
    return records


class LyapunovMonitor:
    """Solver observer recording the Lyapunov value and dissipation each step."""

    def __init__(self, grid: Grid1D, s: int = 3, beta1: float = 0.05):
        self.grid, self.s, self.beta1 = grid, s, beta1
        self.times: list[float] = []
        self.values: list[float] = []
        self.dissipation: list[float] = []

    def __call__(self, t, stepper):
        Z = stepper.perturbation_hat
        if not self.times:
            check_resolution(Z, self.grid, self.s)
        self.times.append(t)
        self.values.append(lyapunov(Z, self.grid, self.s, self.beta1))
        self.dissipation.append(dissipation(Z, self.grid, self.s))

    def max_increase(self) -> float:
        """Largest single-step increase of the Lyapunov value (<= 0 if monotone)."""
        v = np.asarray(self.values)
        return float(np.max(np.diff(v))) if len(v) > 1 else 0.0

    def dissipation_integral(self, T: float | None = None) -> float:
        t = np.asarray(self.times)
        d = np.asarray(self.dissipation)
        if T is not None:
            m = t <= T + 1e-12
            t, d = t[m], d[m]
        return float(np.trapezoid(d, t)) if hasattr(np, "trapezoid") else float(np.trapz(d, t))
