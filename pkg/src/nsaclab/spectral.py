"""Eigenstructure and Green functions of the two linearized systems.

``which="nsac"`` is the hyperbolic-parabolic linearization with symbol
``[[0, i xi], [i c^2 xi, -nu xi^2]]``; ``which="parabolic"`` the modified
system with symbol ``[[-nu xi^2/2, i xi], [i c^2 xi, -nu xi^2/2]]``.
Here ``c`` and ``nu`` are the reference sound speed and viscosity.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .errors import CertificationError, ParameterError, SingularKernelError
from .grid import CutoffPair, Grid1D
from .model import ModelParams

NSAC = "nsac"
PARABOLIC = "parabolic"

# relative discriminant below which the projector sum is replaced by expm
EXPM_FALLBACK_TOL = 1e-4
# relative neighbourhood of |xi| = 2c/nu treated as the Jordan-block point
DEGENERATE_TOL = 1e-8


def _check_which(which):
    if which not in (NSAC, PARABOLIC):
        raise ParameterError(f"unknown system {which!r}")


def symbol_matrix(xi, params: ModelParams, which: str = NSAC) -> np.ndarray:
    _check_which(which)
    xi = np.asarray(xi, dtype=float)
    c, nu = params.cbar, params.nubar
    out = np.empty(xi.shape + (2, 2), dtype=complex)
    diag = -0.5 * nu * xi**2 if which == PARABOLIC else 0.0
    out[..., 0, 0] = diag
    out[..., 0, 1] = 1j * xi
    out[..., 1, 0] = 1j * c**2 * xi
    out[..., 1, 1] = diag if which == PARABOLIC else -nu * xi**2
    return out


def tilde_projections(cbar: float):
    P1 = np.array([[0.5, -0.5 / cbar], [-0.5 * cbar, 0.5]], dtype=complex)
    P2 = np.array([[0.5, 0.5 / cbar], [0.5 * cbar, 0.5]], dtype=complex)
    return P1, P2


def _nsac_eigen(xi, c, nu):
    """Vectorized eigenvalues/projections; returns (lam1, lam2, P1, P2, disc)."""
    xi = np.asarray(xi, dtype=float)
    half = -0.5 * nu * xi**2
    disc = c**2 - 0.25 * nu**2 * xi**2
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        complex_root = -1j * xi * np.sqrt(np.maximum(disc, 0.0))
        lam1 = np.where(disc >= 0, half + complex_root, half - np.abs(xi) * np.sqrt(np.maximum(-disc, 0.0)))
        # product of roots is c^2 xi^2; avoids cancellation for large |xi|
        lam2 = np.where(disc >= 0, half - complex_root, np.where(lam1 != 0, c**2 * xi**2 / lam1, 0.0))
        gap = lam1 - lam2
        safe = np.where(gap == 0, 1.0, gap)
        P1 = np.empty(xi.shape + (2, 2), dtype=complex)
        P1[..., 0, 0] = -lam2 / safe
        P1[..., 0, 1] = 1j * xi / safe
        P1[..., 1, 0] = 1j * c**2 * xi / safe
        P1[..., 1, 1] = lam1 / safe
    P2 = np.eye(2) - P1
    # below this the projections equal the constant ones to machine precision
    # (difference O(nu xi / c)) and the eigen-gap ~ xi underflows
    zero = np.abs(xi) <= 1e-150
    if np.any(zero):
        T1, T2 = tilde_projections(c)
        P1[zero], P2[zero] = T1, T2
    return lam1.astype(complex), lam2.astype(complex), P1, P2, disc


@dataclass
class EigenStructure:
    xi: float
    lam1: complex
    lam2: complex
    P1: np.ndarray
    P2: np.ndarray
    degenerate: bool = False

    @property
    def projections_valid(self) -> bool:
        return not self.degenerate


def eigen_structure(xi: float, params: ModelParams, which: str = NSAC) -> EigenStructure:
    """Closed-form eigenvalues and spectral projections at one wavenumber.

    At the Jordan-block point ``|xi| = 2c/nu`` of the nsac symbol the
    returned structure has ``degenerate=True`` and NaN projections.
    """
    _check_which(which)
    c, nu = params.cbar, params.nubar
    if which == PARABOLIC:
        P1, P2 = tilde_projections(c)
        half = -0.5 * nu * xi**2
        return EigenStructure(xi, complex(half, -c * xi), complex(half, c * xi), P1, P2)
    lam1, lam2, P1, P2, disc = _nsac_eigen(np.array([xi]), c, nu)
    degenerate = bool(xi != 0 and abs(disc[0]) <= DEGENERATE_TOL * c**2)
    if degenerate:
        nan = np.full((2, 2), np.nan, dtype=complex)
        lam = complex(-0.5 * nu * xi**2)
        return EigenStructure(xi, lam, lam, nan, nan.copy(), True)
    return EigenStructure(xi, complex(lam1[0]), complex(lam2[0]), P1[0], P2[0])


def green_symbol(xi, t: float, params: ModelParams, which: str = NSAC) -> np.ndarray:
    """``sum_l exp(lam_l t) P_l`` on an array of wavenumbers, shape ``xi.shape + (2, 2)``."""
    _check_which(which)
    if t < 0:
        raise ParameterError("time must be non-negative")
    xi = np.asarray(xi, dtype=float)
    c, nu = params.cbar, params.nubar
    if which == PARABOLIC:
        P1, P2 = tilde_projections(c)
        half = -0.5 * nu * xi**2 * t
        e1 = np.exp(half - 1j * c * xi * t)[..., None, None]
        e2 = np.exp(half + 1j * c * xi * t)[..., None, None]
        return e1 * P1 + e2 * P2
    lam1, lam2, P1, P2, disc = _nsac_eigen(xi, c, nu)
    with np.errstate(under="ignore"):
        G = np.exp(lam1 * t)[..., None, None] * P1 + np.exp(lam2 * t)[..., None, None] * P2
    near = (np.abs(disc) <= EXPM_FALLBACK_TOL * c**2) & (xi != 0)
    if np.any(near):
        G[near] = expm(t * symbol_matrix(xi[near], params, NSAC))
    return G


def green_tilde_physical(x, t: float, params: ModelParams) -> np.ndarray:
    """Closed-form Green matrix of the modified parabolic system.

    Two Gaussians of variance ``nu t`` with unit mass; the ``P1`` part
    travels right (centre ``+c t``), the ``P2`` part left.
    """
    if t <= 0:
        raise SingularKernelError("the Green kernel is a Dirac mass at t = 0")
    x = np.asarray(x, dtype=float)
    c, nu = params.cbar, params.nubar
    norm = 1.0 / np.sqrt(2 * np.pi * nu * t)
    g1 = norm * np.exp(-((x - c * t) ** 2) / (2 * nu * t))
    g2 = norm * np.exp(-((x + c * t) ** 2) / (2 * nu * t))
    P1, P2 = tilde_projections(c)
    return g1[..., None, None] * P1.real + g2[..., None, None] * P2.real


def damped_heat_apply(phi0, grid: Grid1D, t: float, rate: float, eps: float) -> np.ndarray:
    """Solve ``phi_t + rate phi = eps phi_xx`` exactly per Fourier mode."""
    if t < 0:
        raise ParameterError("time must be non-negative")
    factor = np.exp(-(rate + eps * grid.rxi**2) * t)
    return grid.irfft(factor * grid.rfft(phi0))


@dataclass
class RegimeBounds:
    nu_hat: float
    R1: float
    R2: float
    r0: float
    R0: float
    table: np.ndarray = field(repr=False)
    violations: list = field(default_factory=list)
    max_identity_error: float = 0.0

    @property
    def certified(self) -> bool:
        return not self.violations

    def to_csv(self) -> str:
        lines = ["xi,re_lambda1,re_lambda2,bound,margin"]
        lines += [",".join(f"{v:.17g}" for v in row) for row in self.table]
        return "\n".join(lines) + "\n"


def regime_check(
    params: ModelParams,
    cutoffs: CutoffPair,
    samples: int = 10_000,
    span: float = 1e3,
    slack: float = 1e-6,
    r2_factor: float = 1.0,
    raise_on_violation: bool = True,
) -> RegimeBounds:
    """Certify the low/medium/high frequency bounds on Re(lambda).

    Bounds: ``-nu_hat xi^2`` with ``nu_hat = nu/2`` below ``r0``;
    ``-R2`` with ``R2 = min(r2_factor * nu r0^2, c^2/nu)`` on
    ``[r0, R0]``; ``-R1`` with ``R1 = min(nu R0^2, c^2/nu)`` above ``R0``.
    Each bound is relaxed by the relative ``slack``.  Samples are
    log-spaced on ``[r0/span, R0*span]``.
    """
    c, nu = params.cbar, params.nubar
    r0, R0 = cutoffs.r0, cutoffs.R0
    xi_star = 2 * c / nu
    if not r0 < xi_star < R0:
        raise ParameterError(f"need r0 < 2c/nu = {xi_star} < R0, got r0={r0}, R0={R0}")
    nu_hat = nu / 2
    R1 = min(nu * R0**2, c**2 / nu)
    R2 = min(r2_factor * nu * r0**2, c**2 / nu)
    xi = np.logspace(np.log10(r0 / span), np.log10(R0 * span), samples)
    xi = xi[np.abs(xi - xi_star) > DEGENERATE_TOL * xi_star]
    lam1, lam2, _, _, _ = _nsac_eigen(xi, c, nu)
    bound = np.where(xi < r0, nu_hat * xi**2, np.where(xi > R0, R1, R2)) * (1 - slack)
    worst = np.maximum(lam1.real, lam2.real)
    margin = -bound - worst
    table = np.column_stack([xi, lam1.real, lam2.real, -bound, margin])

    trace_err = np.abs(lam1 + lam2 + nu * xi**2) / (nu * xi**2)
    det_err = np.abs(lam1 * lam2 - c**2 * xi**2) / (c**2 * xi**2)
    ident = float(max(trace_err.max(), det_err.max()))

    bad = np.flatnonzero(margin < 0)
    violations = [(float(xi[i]), float(worst[i]), float(-bound[i])) for i in bad]
    report = RegimeBounds(nu_hat, R1, R2, r0, R0, table, violations, ident)
    if violations and raise_on_violation:
        w = violations[0]
        raise CertificationError(
            f"{len(violations)} regime violations; first at xi={w[0]:.6g}: "
            f"max Re lambda = {w[1]:.6g} > bound {w[2]:.6g}",
            witness=w[0],
            report=report,
        )
    return report


@dataclass
class EnvelopeReport:
    t: float
    C: float
    sup_ratio: float
    argmax_x: float
    floor: float


def _kernel_from_symbol(symbol, grid: Grid1D):
    """Sample ``(1/2pi) int symbol(xi) exp(i xi x) dxi`` on the grid (periodized)."""
    phase = np.exp(1j * grid.xi * grid.x0)[:, None, None]
    vals = np.fft.ifft(symbol * phase, axis=0) * grid.N / grid.L
    return vals.real


def difference_symbol(xi, t: float, params: ModelParams) -> np.ndarray:
    """``G - G_tilde - exp(-c^2 t / nu) A`` with ``A = [[1, 0], [0, 0]]``."""
    A = np.array([[1.0, 0.0], [0.0, 0.0]])
    decay = np.exp(-params.cbar**2 * t / params.nubar)
    return green_symbol(xi, t, params, NSAC) - green_symbol(xi, t, params, PARABOLIC) - decay * A


def green_difference_field(
    t: float, grid: Grid1D, params: ModelParams, C: float | None = None, floor: float = 1e-8
):
    """Physical kernel of :func:`difference_symbol` and its envelope ratio.

    The ratio ``|entry| / envelope`` is evaluated where the Gaussian
    envelope exceeds ``floor`` times its maximum; outside that set the
    envelope underflows relative to round-off.
    """
    if t <= 0:
        raise SingularKernelError("difference kernel undefined at t = 0")
    c, nu = params.cbar, params.nubar
    C = 8.0 * nu if C is None else C
    K = _kernel_from_symbol(difference_symbol(grid.xi, t, params), grid)
    env = envelope(grid.x, t, c, C)
    mask = env >= floor * env.max()
    ratio = np.abs(K).max(axis=(1, 2))[mask] / env[mask]
    i = int(np.argmax(ratio))
    return K, EnvelopeReport(t, C, float(ratio[i]), float(grid.x[mask][i]), floor)


def envelope(x, t, c, C):
    return (1 + t) ** -0.5 * t**-0.5 * (np.exp(-((x + c * t) ** 2) / (C * t)) + np.exp(-((x - c * t) ** 2) / (C * t)))


def search_envelope_constant(times, grid, params, cap: float, lo: float = 1.0, hi: float = 64.0, iters: int = 30):
    """Smallest ``C`` in ``[lo, hi]`` (in units of ``nu``) with envelope ratio <= cap at all ``times``."""
    nu = params.nubar

    def ok(C):
        return all(green_difference_field(t, grid, params, C * nu)[1].sup_ratio <= cap for t in times)

    if not ok(hi):
        raise CertificationError(f"no envelope constant up to {hi} nu meets ratio cap {cap}")
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        lo, hi = (lo, mid) if ok(mid) else (mid, hi)
    return hi * nu
