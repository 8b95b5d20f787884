"""Acceptance checks at the default configuration.

Each ``criterion_<k>`` returns a :class:`CriterionResult`.  Criteria 6-11
share one long lockstep run (nonlinear and parabolic systems advanced
together to T=300), computed once per process.
"""
from __future__ import annotations

import functools
import time
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.linalg import expm

from .experiments import (
    ExperimentConfig,
    difference_reports,
    initial_data,
    linear_series,
    lp_reports,
    lyapunov_checks,
    nsac_reports,
    run_lockstep,
    _alg,
)
from .grid import default_cutoffs
from .model import ModelParams
from .solver import SolverConfig, evolve_linear_state, evolve_nonlinear
from .spectral import PARABOLIC, _kernel_from_symbol, green_symbol, green_tilde_physical, regime_check, symbol_matrix


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    summary: str
    runtime: float = 0.0
    values: dict = field(default_factory=dict)

    def line(self) -> str:
        return f"criterion {self.number:2d} [{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.summary} ({self.runtime:.2f} s)"

    def to_dict(self):
        d = asdict(self)
        d["values"] = {k: (v.item() if isinstance(v, np.generic) else v) for k, v in self.values.items()}
        return d


def _timed(fn):
    @functools.wraps(fn)
    def wrapper(*a, **kw):
        t0 = time.perf_counter()
        res = fn(*a, **kw)
        res.runtime = time.perf_counter() - t0
        return res

    return wrapper


def default_config(**kw) -> ExperimentConfig:
    return ExperimentConfig(**kw)


# 1 -------------------------------------------------------------------------

def symbol_oracle_error(pairs: int = 1000, seed: int = 1, xi_max: float = 20.0, t_max: float = 20.0, params=None):
    """Largest entrywise relative error of ``green_symbol`` against ``expm(t L(xi))``.

    The denominator is floored at ``1e-200`` so entries that underflow in
    both evaluations do not divide by zero.
    """
    params = params or ModelParams()
    rng = np.random.Generator(np.random.Philox(seed))
    xi = rng.uniform(-xi_max, xi_max, pairs)
    t = rng.uniform(0.0, t_max, pairs)
    worst = 0.0
    for x, s in zip(xi, t):
        G = green_symbol(np.array([x]), s, params)[0]
        ref = expm(s * symbol_matrix(x, params))
        scale = np.maximum(np.abs(ref), 1e-200)
        worst = max(worst, float(np.max(np.abs(G - ref) / scale)))
    return worst


@_timed
def criterion_1():
    t0 = time.perf_counter()
    err = symbol_oracle_error()
    dt = time.perf_counter() - t0
    ok = err <= 1e-10 and dt < 1.0
    return CriterionResult(1, "Green symbol vs matrix exponential", ok,
                           f"max rel err {err:.2e} (<= 1e-10), {dt:.2f} s (< 1 s)", values={"max_rel_err": err, "seconds": dt})


# 2 -------------------------------------------------------------------------

def green_tilde_error(times=(1.0, 10.0, 100.0), cfg=None):
    cfg = cfg or default_config()
    grid, params = cfg.grid(), cfg.model_params()
    out = {}
    for t in times:
        ref = _kernel_from_symbol(green_symbol(grid.xi, t, params, PARABOLIC), grid)
        G = green_tilde_physical(grid.x, t, params)
        out[t] = float(np.abs(G - ref).max())
    return out


@_timed
def criterion_2():
    t0 = time.perf_counter()
    errs = green_tilde_error()
    dt = time.perf_counter() - t0
    worst = max(errs.values())
    ok = worst <= 1e-6 and dt < 5.0
    detail = ", ".join(f"t={t:g}: {e:.1e}" for t, e in errs.items())
    return CriterionResult(2, "closed-form parabolic Green function", ok,
                           f"max abs err {worst:.2e} (<= 1e-6) [{detail}], {dt:.2f} s (< 5 s)", values={"max_abs_err": worst, "seconds": dt})


# 3 -------------------------------------------------------------------------

@_timed
def criterion_3():
    p = ModelParams()
    t0 = time.perf_counter()
    rb = regime_check(p, default_cutoffs(p.cbar, p.nubar), 10_000, raise_on_violation=False)
    dt = time.perf_counter() - t0
    nviol = len(rb.violations)
    ok = nviol == 0 and dt < 1.0
    summary = f"nu_hat={rb.nu_hat:g}, R1={rb.R1:g}, R2={rb.R2:g}: {nviol} violations"
    if nviol:
        xi, lam, bound = rb.violations[0]
        summary += f"; first witness xi={xi:.6f} with max Re lambda={lam:.6f} > {bound:.6f}"
    return CriterionResult(3, "frequency-regime certification", ok, summary + f", {dt:.2f} s",
                           values={"violations": nviol, "R2": rb.R2, "seconds": dt})


# 4, 5 ------------------------------------------------------------------------

@functools.lru_cache(maxsize=1)
def _linear_book():
    t0 = time.perf_counter()
    book = linear_series(default_config())
    return book, time.perf_counter() - t0


@_timed
def criterion_4():
    book, dt = _linear_book()
    cfg = default_config()
    tol = {0: 0.10, 1: 0.15, 2: 0.20}
    reps = [_alg(book, cfg, "nw-linear", l, -0.25 - 0.5 * l, tol[l]) for l in (0, 1, 2)]
    ok = all(r.passed for r in reps) and dt < 10.0
    fits = ", ".join(f"l={r.order}: {r.fit:.4f} (target {r.target:g} +- {r.tolerance:g})" for r in reps)
    return CriterionResult(4, "linear decay exponents", ok, f"{fits}; {dt:.2f} s (< 10 s)",
                           values={f"l{r.order}": r.fit for r in reps})


@_timed
def criterion_5():
    book, _ = _linear_book()
    r = _alg(book, default_config(), "difference-linear", 0, -0.75, 0.15)
    return CriterionResult(5, "linear difference decay", bool(r.passed), f"l=0: {r.fit:.4f} (target -0.75 +- 0.15)", values={"fit": r.fit})


# 6 - 11: shared default run ------------------------------------------------------

@functools.lru_cache(maxsize=1)
def default_run():
    """Nonlinear and parabolic systems at the default configuration, with a Lyapunov monitor."""
    cfg = default_config()
    t0 = time.perf_counter()
    res = run_lockstep(cfg, nonlinear=True, parabolic=True, lyapunov=True)
    return cfg, res, time.perf_counter() - t0


def _incomplete(number, name, res):
    return CriterionResult(number, name, False, f"default run aborted: {res.error}")


@_timed
def criterion_6():
    cfg, res, _ = default_run()
    if not res.completed:
        return _incomplete(6, "nonlinear decay", res)
    reps = nsac_reports(res.book, cfg, cfg.model_params())[:2]
    ok = all(r.ok for r in reps)
    fits = ", ".join(f"l={r.order}: {r.fit:.4f} (target {r.target:g} +- {r.tolerance:g}, <= {r.target + r.one_sided:g})" for r in reps)
    return CriterionResult(6, "nonlinear decay", ok, fits, values={f"l{r.order}": r.fit for r in reps})


@_timed
def criterion_7():
    cfg, res, _ = default_run()
    if not res.completed:
        return _incomplete(7, "phase-field decay", res)
    r = nsac_reports(res.book, cfg, cfg.model_params())[3]
    return CriterionResult(7, "phase-field decay", bool(r.passed),
                           f"H^3 rate {r.fit:.4f} in [{r.band[0]:g}, {r.band[1]:g}] over [{cfg.exp_t0:g}, {cfg.exp_t1:g}]", values={"rate": r.fit})


@_timed
def criterion_8():
    cfg, res, _ = default_run()
    if not res.completed:
        return _incomplete(8, "difference to parabolic system", res)
    r = difference_reports(res.book, cfg, cfg.model_params())[0]
    return CriterionResult(8, "difference to parabolic system", r.ok,
                           f"k=0 exponent {r.fit:.4f} (in [-0.95, -0.55], <= -0.55)", values={"fit": r.fit})


@_timed
def criterion_9():
    cfg, res, _ = default_run()
    if not res.completed:
        return _incomplete(9, "phase difference", res)
    r = difference_reports(res.book, cfg, cfg.model_params())[2]
    return CriterionResult(9, "phase difference", bool(r.bound_ok),
                           f"H^3 rate {r.fit:.4f} >= {r.target - r.one_sided:g} over [{cfg.diff_exp_t0:g}, {cfg.diff_exp_t1:g}]",
                           values={"rate": r.fit})


@_timed
def criterion_10():
    cfg, res, _ = default_run()
    if not res.completed:
        return _incomplete(10, "Lp rates", res)
    reps = lp_reports(res.book, cfg)
    ok = all(r.bound_ok for r in reps)
    fits = ", ".join(
        f"{r.kind}: {r.fit:.4f} (target {r.target:g} +- 0.25, {'in' if r.passed else 'outside'} band, <= {r.target + r.one_sided:g})"
        for r in reps
    )
    return CriterionResult(10, "Lp rates", ok, fits, values={r.kind: r.fit for r in reps})


@_timed
def criterion_11():
    cfg, res, _ = default_run()
    if not res.completed:
        return _incomplete(11, "Lyapunov monotonicity", res)
    checks = lyapunov_checks(res.lyapunov, cfg.T)
    ok = all(c[1] for c in checks)
    mono, diss = checks[0][2], checks[1][2]
    summary = (
        f"max step increase {mono['max_increase']:.2e} <= {mono['slack'] * mono['lambda0']:.2e}; "
        f"dissipation integral {diss['I_half']:.6e} -> {diss['I_full']:.6e} as T doubles (ratio {diss['ratio']:.4f} <= {diss['cap']})"
    )
    return CriterionResult(11, "Lyapunov monotonicity", ok, summary, values={"max_increase": mono["max_increase"], "ratio": diss["ratio"]})


# 12 ---------------------------------------------------------------------------

def form_difference(T: float = 10.0, cfg=None) -> float:
    cfg = cfg or default_config()
    grid, params = cfg.grid(), cfg.model_params()
    init = initial_data(cfg, grid)
    scfg = SolverConfig(dt=cfg.dt, T=T, snapshot_stride=10**9)
    a = evolve_nonlinear(init, grid, params, scfg, "perturbation").states[-1]
    b = evolve_nonlinear(init, grid, params, scfg, "primitive").perturbations()[-1]
    return float(np.abs(a.as_array() - b.as_array()).max())


@_timed
def criterion_12():
    d = form_difference()
    return CriterionResult(12, "primitive vs perturbation form", d <= 1e-8, f"max abs difference at T=10: {d:.2e} (<= 1e-8)", values={"max_abs": d})


# 13 ---------------------------------------------------------------------------

def linearity_deviation(delta0: float, t: float = 10.0, cfg=None) -> float:
    """L2 distance between nonlinear and linear evolution of the (n, w, phi) triple at ``t``."""
    cfg = cfg or default_config()
    grid, params = cfg.grid(), cfg.model_params()
    init = initial_data(cfg, grid, delta0)
    scfg = SolverConfig(dt=cfg.dt, T=t, snapshot_stride=10**9)
    nl = evolve_nonlinear(init, grid, params, scfg).states[-1].as_array()
    lin = evolve_linear_state(init, grid, t, params).as_array()
    return float(np.sqrt(np.sum((nl - lin) ** 2) * grid.dx))


@_timed
def criterion_13():
    d0 = default_config().delta0
    a, b = linearity_deviation(d0), linearity_deviation(d0 / 2)
    ratio = a / b
    ok = 3.2 <= ratio <= 4.8
    return CriterionResult(13, "amplitude-scaling linearity", ok,
                           f"deviation {a:.3e} / {b:.3e} = {ratio:.4f} (in [3.2, 4.8])", values={"ratio": ratio})


CRITERIA = {k: globals()[f"criterion_{k}"] for k in range(1, 14)}


def run_all(only=None, echo: bool = False) -> list[CriterionResult]:
    results = []
    for k, fn in CRITERIA.items():
        if only is not None and k not in only:
            continue
        r = fn()
        if echo:
            print(r.line(), flush=True)
        results.append(r)
    return results
