"""Uniform periodic grid, Fourier differentiation and discrete norms.

All transforms use real FFTs.  Coefficients follow numpy's convention
``fhat_k = sum_j f_j exp(-i xi_k x_j)`` so that the physical-space
quadrature of ``|f|**2`` equals ``L / N**2 * sum_k |fhat_k|**2`` (with the
usual doubling of the interior rfft bins).
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ParameterError


@dataclass(frozen=True)
class Grid1D:
    L: float
    N: int
    x0: float = 0.0

    def __post_init__(self):
        if not self.L > 0:
            raise ParameterError("domain length must be positive")
        if self.N < 4 or self.N & (self.N - 1):
            raise ParameterError(f"point count must be a power of two, got {self.N}")

    @property
    def dx(self) -> float:
        return self.L / self.N

    @cached_property
    def x(self) -> np.ndarray:
        return self.x0 + self.dx * np.arange(self.N)

    @cached_property
    def xi(self) -> np.ndarray:
        """Full wavenumber set in fft order (includes -pi/dx, symmetric otherwise)."""
        return 2 * np.pi * np.fft.fftfreq(self.N, self.dx)

    @cached_property
    def rxi(self) -> np.ndarray:
        """Non-negative wavenumbers matching ``np.fft.rfft`` output."""
        return 2 * np.pi * np.fft.rfftfreq(self.N, self.dx)

    @cached_property
    def parseval_weights(self) -> np.ndarray:
        """Weights turning ``|rfft|**2`` into the rectangle-rule integral."""
        w = np.full(self.N // 2 + 1, 2.0)
        w[0] = w[-1] = 1.0
        return w * self.L / self.N**2

    @property
    def xi_max(self) -> float:
        return np.pi / self.dx

    def rfft(self, f):
        return np.fft.rfft(f, axis=-1)

    def irfft(self, fhat):
        return np.fft.irfft(fhat, n=self.N, axis=-1)


def derivative_symbol(grid: Grid1D, order: int) -> np.ndarray:
    """``(i xi)**order`` on the rfft bins; odd orders drop the Nyquist bin."""
    sym = (1j * grid.rxi) ** order
    if order % 2:
        sym[-1] = 0.0
    return sym


def _warn_order(grid: Grid1D, order: int):
    # round-off amplification xi_max**order * machine epsilon
    if order > 0 and order * np.log10(grid.xi_max) - 15.65 > -2:
        warnings.warn(
            f"derivative order {order} amplifies round-off beyond 1e-2 on this grid",
            RuntimeWarning,
            stacklevel=3,
        )


def spectral_derivative(f, grid: Grid1D, order: int = 1) -> np.ndarray:
    """Exact ``order``-th derivative of the trigonometric interpolant of ``f``."""
    if order < 0:
        raise ParameterError("derivative order must be non-negative")
    if order == 0:
        return np.array(f, dtype=float, copy=True)
    _warn_order(grid, order)
    return grid.irfft(derivative_symbol(grid, order) * grid.rfft(f))


def sobolev_weight(grid: Grid1D, s: int, start: int = 0) -> np.ndarray:
    """``sum_{l=start}^{s} |symbol of D^l|**2`` on rfft bins."""
    w = np.zeros(grid.N // 2 + 1)
    for l in range(start, s + 1):
        w += np.abs(derivative_symbol(grid, l)) ** 2
    return w


def hs_sq_hat(fhat, grid: Grid1D, s: int, start: int = 0):
    """Squared ``sum_{l=start}^{s} ||D^l f||_2^2`` from rfft coefficients."""
    return np.sum(grid.parseval_weights * sobolev_weight(grid, s, start) * np.abs(fhat) ** 2, axis=-1)


def inner_hat(ahat, bhat, grid: Grid1D):
    """``int a b dx`` for real fields given their rfft coefficients."""
    return np.sum(grid.parseval_weights * (ahat * np.conj(bhat)).real, axis=-1)


def _components(f):
    if hasattr(f, "as_array"):
        f = f.as_array()
    f = np.asarray(f, dtype=float)
    return f.reshape(-1, f.shape[-1])


def norm(f, grid: Grid1D, kind: str = "L2", p: float = 2.0, s: int = 0, k: int = 0) -> float:
    """Discrete norm of a field or stack of fields.

    kind: ``"Lp"`` (with ``p``; ``"L1"``, ``"L2"``, ``"Linf"`` are shortcuts),
    ``"Hs"`` (with ``s``), or ``"Wk1"`` (with ``k``).  A stack of fields is
    combined as the l^p sum of the per-component norms (l^2 for Hs).
    """
    shortcuts = {"L1": 1.0, "L2": 2.0, "Linf": np.inf}
    if kind in shortcuts:
        kind, p = "Lp", shortcuts[kind]
    comps = _components(f)
    if kind == "Lp":
        if not p >= 1:
            raise ParameterError(f"Lp norm needs p >= 1, got {p}")
        if np.isinf(p):
            return float(np.max(np.abs(comps))) if comps.size else 0.0
        vals = np.sum(np.abs(comps) ** p, axis=-1) * grid.dx
        return float(np.sum(vals) ** (1.0 / p))
    if kind == "Hs":
        if s < 0:
            raise ParameterError("Sobolev index must be non-negative")
        _warn_order(grid, s)
        return float(np.sqrt(np.sum(hs_sq_hat(grid.rfft(comps), grid, s))))
    if kind == "Wk1":
        if k < 0:
            raise ParameterError("derivative count must be non-negative")
        total = 0.0
        for l in range(k + 1):
            total += sum(norm(spectral_derivative(c, grid, l), grid, "L1") for c in comps)
        return float(total)
    raise ParameterError(f"unknown norm kind {kind!r}")


def _smooth_step(t):
    """C-infinity step: 1 for t <= 0, 0 for t >= 1."""
    t = np.clip(t, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        h_in = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1 - t, 1.0)), 0.0)
        h_out = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
    return h_in / (h_in + h_out)


@dataclass(frozen=True)
class CutoffPair:
    """Low-frequency cutoff ``chi1`` (1 on |xi| <= r0, 0 on |xi| >= R0)."""

    r0: float
    R0: float
    sharp: bool = False

    def __post_init__(self):
        if not 0 < self.r0 < self.R0:
            raise ParameterError("cutoff radii must satisfy 0 < r0 < R0")

    def chi1(self, xi):
        a = np.abs(np.asarray(xi, dtype=float))
        if self.sharp:
            return (a <= self.r0).astype(float)
        return _smooth_step((a - self.r0) / (self.R0 - self.r0))

    def chi_inf(self, xi):
        return 1.0 - self.chi1(xi)


def default_cutoffs(cbar: float, nubar: float) -> CutoffPair:
    return CutoffPair(0.5 * cbar / nubar, 4.0 * cbar / nubar)


def freq_split(f, grid: Grid1D, cutoffs: CutoffPair):
    """Return ``(f_low, f_high)`` with ``f_low + f_high == f``."""
    f = np.asarray(f, dtype=float)
    low = grid.irfft(cutoffs.chi1(grid.rxi) * grid.rfft(f))
    return low, f - low


class Dealiaser:
    """3/2 zero-padding for products of band-limited fields.

    ``to_fine`` maps rfft coefficients on the base grid to samples on the
    padded grid; ``from_fine`` transforms back and truncates.
    """

    def __init__(self, grid: Grid1D, factor: float = 1.5):
        self.N = grid.N
        self.M = int(round(grid.N * factor))
        if self.M % 2:
            self.M += 1
        self._scale = self.M / self.N

    def to_fine(self, fhat):
        fhat = np.asarray(fhat)
        pad = np.zeros(fhat.shape[:-1] + (self.M // 2 + 1,), dtype=complex)
        pad[..., : self.N // 2] = fhat[..., : self.N // 2]
        pad[..., self.N // 2] = 0.5 * fhat[..., self.N // 2]
        return np.fft.irfft(pad * self._scale, n=self.M, axis=-1)

    def from_fine(self, g):
        ghat = np.fft.rfft(g, axis=-1)[..., : self.N // 2 + 1] / self._scale
        ghat[..., -1] = 0.0
        return ghat
