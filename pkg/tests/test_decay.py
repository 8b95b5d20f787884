import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nsaclab.decay import ALGEBRAIC, EXPONENTIAL, NormSeries, fit_rate, floor_correct
from nsaclab.errors import FitError
from nsaclab.grid import Grid1D, norm, spectral_derivative

T = np.linspace(0, 300, 601)


def test_exact_algebraic():
    r = fit_rate(NormSeries(T, (1 + T) ** -0.75), ALGEBRAIC, (50, 300))
    assert r.fit == pytest.approx(-0.75, abs=1e-12) and r.stderr < 1e-10
    assert r.samples == 501


def test_exact_exponential():
    t = np.linspace(0, 6, 121)
    r = fit_rate(NormSeries(t, 5 * np.exp(-2 * t)), EXPONENTIAL, (0.5, 6))
    assert r.fit == pytest.approx(2.0, abs=1e-12)


def test_noisy_series():
    rng = np.random.Generator(np.random.Philox(7))
    v = (1 + T) ** -0.25 * (1 + 0.01 * rng.standard_normal(T.size))
    r = fit_rate(NormSeries(T, v), ALGEBRAIC, (50, 300))
    assert -0.27 <= r.fit <= -0.23


@given(st.floats(1e-6, 1e6), st.floats(-2, 0))
def test_scale_invariance(c, a):
    s = NormSeries(T, (1 + T) ** a * (1 + 0.1 * np.sin(T)))
    r1 = fit_rate(s, window=(50, 300)).fit
    r2 = fit_rate(NormSeries(T, c * s.values), window=(50, 300)).fit
    assert r2 == pytest.approx(r1, abs=1e-9)


def test_half_window_consistency():
    rng = np.random.default_rng(3)
    v = (1 + T) ** -0.75 * (1 + 0.002 * rng.standard_normal(T.size))
    full = fit_rate(NormSeries(T, v), window=(50, 300))
    half = fit_rate(NormSeries(T, v), window=(175, 300))
    assert abs(half.fit - full.fit) <= 3 * half.stderr


def test_pass_flags():
    s = NormSeries(T, (1 + T) ** -0.3)
    r = fit_rate(s, window=(50, 300), target=-0.25, tolerance=0.1, one_sided=0.05)
    assert r.passed and r.bound_ok and r.ok
    r = fit_rate(s, window=(50, 300), target=-0.5, tolerance=0.1, one_sided=0.05)
    assert not r.passed and not r.bound_ok and not r.ok
    assert fit_rate(s, window=(50, 300), target=-0.25, tolerance=0.01).passed is False
    # pass <=> |fit - target| <= tolerance
    r = fit_rate(s, window=(50, 300), target=-0.2, tolerance=0.1)
    assert r.passed == (abs(r.fit - r.target) <= r.tolerance)


def test_exponential_band_and_bound():
    t = np.linspace(0, 6, 121)
    s = NormSeries(t, np.exp(-1.9 * t), "Hs", 3, "phi")
    r = fit_rate(s, EXPONENTIAL, (0.5, 6), target=2.0, band=(1.8, 2.05))
    assert r.passed
    r = fit_rate(s, EXPONENTIAL, (0.5, 6), target=2.0, band=(1.95, 2.05), one_sided=0.2)
    assert not r.passed and r.bound_ok
    assert r.to_dict()["band"] == [1.95, 2.05] and r.to_dict()["window"] == [0.5, 6]


def test_errors():
    with pytest.raises(FitError):
        fit_rate(NormSeries(T, np.ones_like(T)), window=(0, 3))
    v = np.ones_like(T)
    v[200] = 0.0
    with pytest.raises(FitError):
        fit_rate(NormSeries(T, v), window=(50, 300))
    with pytest.raises(FitError):
        fit_rate(NormSeries(T, v), "power")


def test_series_validation():
    with pytest.raises(ValueError):
        NormSeries([0, 1], [1.0])
    with pytest.raises(ValueError):
        NormSeries([0, 0], [1.0, 1.0])
    with pytest.raises(ValueError):
        NormSeries([0, 1], [1.0, np.inf])


class TestFloorCorrection:
    g = Grid1D(100.0, 1024, -50.0)

    def test_mean_zero_unchanged(self):
        f = np.sin(2 * np.pi * 3 * self.g.x / self.g.L)
        np.testing.assert_allclose(floor_correct(f, self.g), f, atol=1e-15)

    def test_constant_removed(self):
        assert np.abs(floor_correct(np.full(self.g.N, 2.5), self.g)).max() < 1e-15

    def test_removed_floor_is_mass_over_sqrt_length(self):
        b = np.exp(-(self.g.x**2) / 2)
        m = np.sum(b) * self.g.dx
        removed = b - floor_correct(b, self.g)
        assert norm(removed, self.g) == pytest.approx(abs(m) / np.sqrt(self.g.L), rel=1e-12)

    def test_stacks(self):
        f = np.stack([np.full(self.g.N, 1.0), np.full(self.g.N, -3.0)])
        assert np.abs(floor_correct(f, self.g)).max() < 1e-15

    @given(st.integers(0, 2**32 - 1), st.integers(1, 3))
    def test_commutes_with_derivative(self, seed, order):
        g = Grid1D(10.0, 64)
        f = np.random.default_rng(seed).normal(size=64) + 3.0
        a = spectral_derivative(floor_correct(f, g), g, order)
        b = floor_correct(spectral_derivative(f, g, order), g)
        np.testing.assert_allclose(a, b, atol=1e-10 * max(1, np.abs(a).max()))
