"""Decay-rate extraction from norm time series."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.stats import linregress

from .errors import FitError
from .grid import Grid1D

ALGEBRAIC = "algebraic"
EXPONENTIAL = "exponential"


@dataclass
class NormSeries:
    times: np.ndarray
    values: np.ndarray
    kind: str = "L2"
    order: int = 0
    channel: str = "nw"

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.times.shape != self.values.shape:
            raise ValueError("times and values differ in length")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("series contains non-finite values")

    def window(self, t0, t1) -> "NormSeries":
        m = (self.times >= t0) & (self.times <= t1)
        return NormSeries(self.times[m], self.values[m], self.kind, self.order, self.channel)


@dataclass
class DecayReport:
    """Outcome of one fit.

    ``passed`` is the two-sided check ``|fit - target| <= tolerance`` (or
    ``band[0] <= fit <= band[1]`` when an asymmetric band is given);
    ``bound_ok`` the one-sided check that the series decays at least as
    fast as the target allows (``fit <= target + one_sided`` for exponents,
    ``rate >= target - one_sided`` for exponential rates).
    """

    mode: str
    fit: float
    stderr: float
    window: tuple
    samples: int
    target: float | None = None
    tolerance: float | None = None
    one_sided: float | None = None
    alpha: float = 0.0
    band: tuple | None = None
    channel: str = ""
    kind: str = ""
    order: int = 0
    passed: bool | None = None
    bound_ok: bool | None = None
    meta: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        flags = [f for f in (self.passed, self.bound_ok) if f is not None]
        return all(flags)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["window"] = list(self.window)
        d["band"] = list(self.band) if self.band is not None else None
        d["ok"] = self.ok
        return d


def floor_correct(fields, grid: Grid1D | None = None):
    """Remove the zero-wavenumber mode (spatial mean) of each field.

    On a periodic box of length ``L`` a field of mass ``m`` keeps an L2
    floor ``|m| / sqrt(L)`` that is absent on the whole line.
    """
    f = np.asarray(fields, dtype=float)
    return f - f.mean(axis=-1, keepdims=True)


def fit_rate(
    series: NormSeries,
    mode: str = ALGEBRAIC,
    window: tuple | None = None,
    target: float | None = None,
    tolerance: float | None = None,
    one_sided: float | None = None,
    alpha: float = 0.0,
    band: tuple | None = None,
    min_samples: int = 10,
) -> DecayReport:
    """Least-squares decay fit of a norm series.

    algebraic: slope of ``log(value)`` against ``log(1 + t)``.
    exponential: minus the slope of ``log(value)`` against ``t``.
    """
    if mode not in (ALGEBRAIC, EXPONENTIAL):
        raise FitError(f"unknown fit mode {mode!r}")
    if window is None:
        window = (float(series.times[0]), float(series.times[-1]))
    s = series.window(*window)
    if len(s.times) < min_samples:
        raise FitError(f"{len(s.times)} samples in window {window}, need {min_samples}")
    if np.any(s.values <= 0):
        raise FitError(f"non-positive values in window {window}; series hit the numerical floor")
    x = np.log1p(s.times) if mode == ALGEBRAIC else s.times
    res = linregress(x, np.log(s.values))
    fit = res.slope if mode == ALGEBRAIC else -res.slope
    report = DecayReport(
        mode, float(fit), float(res.stderr), tuple(window), len(s.times), target, tolerance,
        one_sided, alpha, band, series.channel, series.kind, series.order,
    )
    if target is not None:
        if band is not None:
            report.passed = bool(band[0] <= fit <= band[1])
        elif tolerance is not None:
            report.passed = bool(abs(fit - target) <= tolerance)
        if one_sided is not None:
            if mode == ALGEBRAIC:
                report.bound_ok = bool(fit <= target + one_sided)
            else:
                report.bound_ok = bool(fit >= target - one_sided)
    return report
