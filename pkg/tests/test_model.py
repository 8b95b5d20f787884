import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from nsaclab.errors import ConstitutiveLawError, DomainError, StateValidityError
from nsaclab.grid import Grid1D
from nsaclab.model import (
    PERTURBATION,
    PRIMITIVE,
    ModelParams,
    PressureLaw,
    StateTriple,
    ViscosityLaw,
    convert_representation,
    eulerian_to_lagrangian,
    nonlinear_terms,
    pressure_eval,
    pressure_potential,
    sound_speed,
    viscosity_eval,
)
from nsaclab.solver import perturbation_rhs, primitive_rhs

from conftest import smooth_fields


def fd_derivatives(f, v, h=1e-5):
    d1 = (f(v + h) - f(v - h)) / (2 * h)
    d2 = (f(v + h) - 2 * f(v) + f(v - h)) / h**2
    return d1, d2


class TestPressure:
    def test_default_law_at_one(self):
        law = PressureLaw(0.5, 2.0)
        p, dp, d2p = pressure_eval(1.0, law)
        fd1, fd2 = fd_derivatives(lambda v: 0.5 * v**-2.0, 1.0)
        assert p == pytest.approx(0.5)
        assert dp == pytest.approx(-1.0) and dp == pytest.approx(fd1, rel=1e-8)
        assert d2p == pytest.approx(3.0) and d2p == pytest.approx(fd2, rel=1e-4)

    @pytest.mark.parametrize("gamma", [1.1, 1.4, 2.0, 3.7])
    def test_unit_amplitude_at_one(self, gamma):
        assert pressure_eval(1.0, PressureLaw(1.0, gamma))[0] == pytest.approx(1.0)

    def test_adiabatic_value(self):
        p = pressure_eval(2.0, PressureLaw(1.0, 1.4))[0]
        assert p == pytest.approx(np.exp(-1.4 * np.log(2.0)), rel=1e-14)
        assert p == pytest.approx(0.378929, abs=1e-6)

    @pytest.mark.parametrize("v", [0.0, -1.0, np.nan])
    def test_non_positive_volume(self, v):
        with pytest.raises(DomainError):
            pressure_eval(v, PressureLaw())

    @given(st.floats(0.5, 2.0), st.floats(0.1, 5.0), st.floats(1.01, 4.0))
    def test_monotone_convex(self, v, a, gamma):
        p, dp, d2p = pressure_eval(v, PressureLaw(a, gamma))
        assert p > 0 and dp < 0 and d2p > 0

    def test_invalid_law(self):
        with pytest.raises(ConstitutiveLawError):
            PressureLaw(-1.0, 2.0)
        with pytest.raises(ConstitutiveLawError):
            PressureLaw(1.0, 1.0)


class TestSoundSpeedAndViscosity:
    def test_default_sound_speed(self):
        assert sound_speed(ModelParams()) == pytest.approx(1.0)

    def test_sound_speed_sqrt2(self):
        p = ModelParams(pressure=PressureLaw(1.0, 2.0))
        fd1, _ = fd_derivatives(lambda v: v**-2.0, 1.0)
        assert sound_speed(p) == pytest.approx(np.sqrt(2.0))
        assert sound_speed(p) ** 2 == pytest.approx(-fd1, rel=1e-8)

    @given(st.floats(0.2, 5.0), st.floats(1.01, 4.0), st.floats(0.3, 3.0))
    def test_definition(self, a, gamma, vbar):
        p = ModelParams(vbar=vbar, pressure=PressureLaw(a, gamma))
        assert p.cbar**2 + pressure_eval(vbar, p.pressure)[1] == pytest.approx(0.0, abs=1e-12 * p.cbar**2)

    def test_viscosity_examples(self):
        assert viscosity_eval(3.3, ViscosityLaw("constant", 1.7)) == pytest.approx(1.7)
        assert viscosity_eval(1.0, ViscosityLaw("inverse-volume", 1.0)) == pytest.approx(1.0)
        assert viscosity_eval(0.5, ViscosityLaw("inverse-volume", 2.0)) == pytest.approx(4.0)
        with pytest.raises(DomainError):
            viscosity_eval(0.0, ViscosityLaw())

    @given(st.floats(0.5, 2.0))
    def test_viscosity_positive(self, v):
        assert viscosity_eval(v, ViscosityLaw()) > 0

    def test_derived_constants(self):
        p = ModelParams()
        assert (p.cbar, p.nubar, p.damping, p.eta) == pytest.approx((1.0, 1.0, 2.0, 1.0))
        assert p.eta_bar(0.05) == pytest.approx(1.0)

    @given(st.floats(0.1, 5.0), st.floats(0.1, 3.0), st.floats(0.0, 1.0))
    def test_eta_bound(self, eps, vbar, alpha):
        p = ModelParams(eps=eps, vbar=vbar)
        assert p.eta <= p.eta_bar(alpha) + alpha + 1e-12


class TestNonlinearTerms:
    def test_vanish_at_constant_state(self, params):
        z = np.zeros(5)
        for f in nonlinear_terms(z, z, z, z, z, params):
            assert np.all(f == 0)

    def test_f1_value(self, params):
        # p evaluated independently: a / v^2 with a = 0.5
        oracle = -0.5 / 1.1**2 + 0.5 + (-1.0) * 0.1
        f1 = nonlinear_terms(0.1, 0.0, 0.0, 0.0, 0.0, params)[0]
        assert f1 == pytest.approx(oracle, rel=1e-14)
        assert f1 == pytest.approx(-0.0132231, abs=1e-7)

    def test_f5_value(self, params):
        f5 = nonlinear_terms(0.0, 0.0, 0.0, 0.1, 0.2, params)[4]
        assert f5 == pytest.approx(-0.04 / 2.2 - 0.02, rel=1e-14)
        assert f5 == pytest.approx(-0.0381818, abs=1e-7)

    def test_term_by_term(self):
        p = ModelParams(eps=0.7, vbar=1.3, viscosity=ViscosityLaw("inverse-volume", 1.5))
        n, nx, wx, ph, phx = 0.05, -0.2, 0.3, 0.1, 0.4
        v = n + 1.3
        f = nonlinear_terms(n, nx, wx, ph, phx, p)
        assert f[1] == pytest.approx((1.5 / v - 1.5 / 1.3) * wx)
        assert f[2] == pytest.approx(-0.7 * phx**2 / (8 * (ph + 1) * v**2))
        assert f[3] == pytest.approx(-0.7 * nx * phx / v - 2 * n * (ph**2 + ph) / 0.7)
        assert f[4] == pytest.approx(-0.7 * phx**2 / (2 * (ph + 1)) - 2 * 1.3 * ph**2 / 0.7)

    def test_constant_viscosity_kills_f2(self):
        p = ModelParams(viscosity=ViscosityLaw("constant", 1.0))
        assert nonlinear_terms(0.1, 0.0, 0.5, 0.0, 0.0, p)[1] == 0.0

    def test_invalid_states(self, params):
        with pytest.raises(StateValidityError):
            nonlinear_terms(-1.0, 0, 0, 0, 0, params)
        with pytest.raises(StateValidityError):
            nonlinear_terms(0.0, 0, 0, -1.0, 0, params)

    @given(st.floats(-0.5, 0.5))
    def test_f1_quadratic(self, n):
        p = ModelParams()
        # sup of p'' on [1/2, 3/2] is at v = 1/2
        K = pressure_eval(0.5, p.pressure)[2]
        assert abs(nonlinear_terms(n, 0, 0, 0, 0, p)[0]) <= K * n**2 + 1e-15


class TestPressurePotential:
    def test_zero(self, params):
        assert pressure_potential(0.0, params) == 0.0

    def test_quadrature_oracle(self, params):
        integral, _ = quad(lambda s: 0.5 * s**-2.0, 1.0, 1.1, epsabs=1e-14)
        oracle = 0.5 * 0.1 - integral
        assert pressure_potential(0.1, params) == pytest.approx(oracle, rel=1e-10)
        assert pressure_potential(0.1, params) == pytest.approx(0.0045455, abs=1e-7)

    def test_taylor_limit(self, params):
        n = 1e-3
        assert pressure_potential(n, params) / (params.cbar**2 * n**2 / 2) == pytest.approx(1.0, rel=1e-2)

    @given(st.floats(-0.9, 3.0), st.floats(1.01, 4.0))
    def test_nonnegative(self, n, gamma):
        p = ModelParams(pressure=PressureLaw(0.5, gamma))
        A = pressure_potential(n, p)
        assert A >= -1e-15
        if abs(n) > 1e-6:
            assert A > 0

    def test_other_law(self):
        p = ModelParams(vbar=0.8, pressure=PressureLaw(1.0, 1.4))
        integral, _ = quad(lambda s: s**-1.4, 0.8, 1.1, epsabs=1e-14)
        assert pressure_potential(0.3, p) == pytest.approx(0.8**-1.4 * 0.3 - integral, rel=1e-10)

    def test_vacuum(self, params):
        with pytest.raises(DomainError):
            pressure_potential(-1.0, params)


class TestRepresentation:
    def test_constant_state(self, params):
        s = convert_representation(StateTriple(np.ones(4), np.zeros(4), np.ones(4)), params)
        assert s.representation == PERTURBATION
        assert np.all(s.as_array() == 0)

    @given(st.integers(0, 2**32 - 1))
    def test_round_trip(self, seed):
        rng = np.random.default_rng(seed)
        p = ModelParams(vbar=1.7, ubar=-0.4)
        a = rng.normal(size=(3, 16))
        s = StateTriple(*a, PRIMITIVE)
        back = convert_representation(convert_representation(s, p), p)
        assert back.representation == PRIMITIVE
        np.testing.assert_allclose(back.as_array(), a, rtol=0, atol=1e-15)

    def test_shape_and_tag_validation(self):
        with pytest.raises(ValueError):
            StateTriple(np.zeros(3), np.zeros(4), np.zeros(3))
        with pytest.raises(ValueError):
            StateTriple(np.zeros(3), np.zeros(3), np.zeros(3), "eulerian")

    def test_check_bounds(self, params):
        ok = StateTriple(np.full(4, 1.2), np.zeros(4), np.full(4, 1.1))
        ok.check_bounds(params)
        with pytest.raises(StateValidityError):
            StateTriple(np.full(4, 2.5), np.zeros(4), np.ones(4)).check_bounds(params)
        with pytest.raises(StateValidityError):
            StateTriple(np.ones(4), np.zeros(4), np.full(4, 0.3)).check_bounds(params)

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_primitive_and_perturbation_rhs_agree(self, seed):
        grid = Grid1D(60.0, 256, -30.0)
        p = ModelParams(eps=0.8, vbar=1.2, ubar=0.3)
        a = smooth_fields(grid, np.random.default_rng(seed), amp=0.05)
        s = StateTriple(*a, PERTURBATION)
        r1 = primitive_rhs(s, grid, p).as_array()
        r2 = perturbation_rhs(s, grid, p).as_array()
        assert np.abs(r1 - r2).max() <= 1e-10 * max(np.abs(r1).max(), 1.0)


class TestEulerianToLagrangian:
    def test_uniform_density(self):
        x = np.linspace(0, 10, 201)
        d = eulerian_to_lagrangian(x, np.full_like(x, 2.0), np.zeros_like(x), np.ones_like(x))
        np.testing.assert_allclose(d.x, 2.0 * x, atol=1e-12)
        np.testing.assert_allclose(d.v, 0.5, atol=1e-14)

    @pytest.mark.parametrize("sign", [1.0, -1.0])
    def test_pure_phase(self, sign):
        x = np.linspace(0, 1, 50)
        d = eulerian_to_lagrangian(x, 1 + 0.1 * np.sin(x), x, np.full_like(x, sign))
        np.testing.assert_allclose(d.phi, 1.0, atol=1e-14)

    def test_mass_coordinate_jacobian(self):
        xe = np.linspace(0, 2 * np.pi, 4001)
        rho = 1.0 + 0.3 * np.sin(xe)
        d = eulerian_to_lagrangian(xe, rho, np.zeros_like(xe), np.zeros_like(xe))
        # dx/dxe = rho  <=>  v(x) = 1/rho(xe(x)); invert the analytic mass map
        mass = xe + 0.3 * (1 - np.cos(xe))
        xe_of_x = np.interp(d.x, mass, xe)
        np.testing.assert_allclose(d.v, 1.0 / (1.0 + 0.3 * np.sin(xe_of_x)), atol=1e-6)
        assert d.x[-1] == pytest.approx(2 * np.pi, rel=1e-6)

    def test_non_positive_density(self):
        x = np.linspace(0, 1, 5)
        with pytest.raises(DomainError):
            eulerian_to_lagrangian(x, np.array([1, 1, 0, 1, 1.0]), x, x)
