import numpy as np
import pytest

from nsaclab.errors import GuardViolation, ParameterError, StateValidityError
from nsaclab.grid import Grid1D
from nsaclab.io import SnapshotStore
from nsaclab.model import PERTURBATION, PRIMITIVE, ModelParams, StateTriple, convert_representation
from nsaclab.solver import (
    RK4,
    NSACStepper,
    ParabolicStepper,
    SolverConfig,
    Trajectory,
    evolve_linear,
    evolve_linear_state,
    evolve_nonlinear,
    evolve_parabolic,
)
from nsaclab.spectral import PARABOLIC, damped_heat_apply

G = Grid1D(200.0, 512, -100.0)
P = ModelParams()


def bumps(d0=0.01, grid=G, sigma=1.0, sigma_phi=5.0, w_ratio=0.5):
    b = np.exp(-(grid.x**2) / (2 * sigma**2))
    return StateTriple(d0 * b, w_ratio * d0 * b, d0 * np.exp(-(grid.x**2) / (2 * sigma_phi**2)), PERTURBATION)


def final(traj):
    return traj.perturbations()[-1].as_array()


class TestConfig:
    def test_validation(self):
        with pytest.raises(ParameterError):
            SolverConfig(dt=0.0)
        with pytest.raises(ParameterError):
            SolverConfig(integrator="euler")
        with pytest.raises(ParameterError):
            SolverConfig(snapshot_stride=0)

    def test_step_count(self):
        c = SolverConfig(dt=0.02, T=300.0)
        assert c.steps_between(0, c.T) == 15000
        assert abs(c.steps_between(0, c.T) * c.dt - c.T) <= c.dt

    def test_trajectory_times_increase(self):
        tr = Trajectory(G, P, PERTURBATION)
        tr.append(0.0, None)
        with pytest.raises(ValueError):
            tr.append(0.0, None)


class TestNonlinear:
    @pytest.mark.parametrize("form", [PERTURBATION, PRIMITIVE])
    def test_zero_perturbation(self, form):
        z = StateTriple(np.zeros(G.N), np.zeros(G.N), np.zeros(G.N), PERTURBATION)
        tr = evolve_nonlinear(z, G, P, SolverConfig(T=2.0, snapshot_stride=25), form)
        assert tr.completed and len(tr) == 5
        for s in tr.perturbations():
            assert np.abs(s.as_array()).max() <= 1e-15

    def test_forms_agree(self):
        p = ModelParams(eps=0.8, vbar=1.1, ubar=0.2)
        cfg = SolverConfig(T=5.0, snapshot_stride=10**6)
        a = final(evolve_nonlinear(bumps(0.02), G, p, cfg, PERTURBATION))
        b = final(evolve_nonlinear(bumps(0.02), G, p, cfg, PRIMITIVE))
        assert np.abs(a - b).max() <= 1e-12

    def test_primitive_state_representation(self):
        tr = evolve_nonlinear(bumps(), G, P, SolverConfig(T=0.2), PRIMITIVE)
        assert tr.states[-1].representation == PRIMITIVE
        assert np.mean(tr.states[-1].v) == pytest.approx(P.vbar + np.mean(bumps().v), rel=1e-12)

    def test_amplitude_scaling(self):
        def dev(d0):
            init = bumps(d0)
            nl = final(evolve_nonlinear(init, G, P, SolverConfig(T=10.0, snapshot_stride=10**6)))
            lin = evolve_linear_state(init, G, 10.0, P).as_array()
            return np.sqrt(np.sum((nl - lin) ** 2))

        assert 3.2 <= dev(0.01) / dev(0.005) <= 4.8

    def test_mean_conservation(self):
        init = bumps(0.02)
        tr = evolve_nonlinear(init, G, P, SolverConfig(T=10.0, snapshot_stride=50))
        m0 = init.as_array()[:2].mean(axis=1)
        for t, s in zip(tr.times, tr.perturbations()):
            drift = np.abs(s.as_array()[:2].mean(axis=1) - m0).max()
            assert drift <= 1e-12 * max(t, 1.0)

    def test_guards_hold_for_small_data(self):
        tr = evolve_nonlinear(bumps(0.01), G, P, SolverConfig(T=10.0, snapshot_stride=25), PRIMITIVE)
        for s in tr.states:
            s.check_bounds(P)

    def test_rk4_agrees(self):
        init = bumps(0.01)
        a = final(evolve_nonlinear(init, G, P, SolverConfig(dt=0.005, T=2.0)))
        b = final(evolve_nonlinear(init, Grid1D(200.0, 512, -100.0), P, SolverConfig(dt=0.005, T=2.0, integrator=RK4)))
        assert np.abs(a - b).max() <= 1e-8

    def test_temporal_convergence(self):
        init = bumps(0.05, sigma=2.0)

        def run(dt):
            return final(evolve_nonlinear(init, G, P, SolverConfig(dt=dt, T=10.0, snapshot_stride=10**6)))

        ref = run(0.04 / 8)
        e1 = np.abs(run(0.04) - ref).max()
        e2 = np.abs(run(0.02) - ref).max()
        assert e1 / e2 >= 2.0

    def test_rejects_out_of_bounds_initial_data(self):
        with pytest.raises(StateValidityError):
            evolve_nonlinear(bumps(1.2), G, P, SolverConfig(T=1.0))
        with pytest.raises(StateValidityError):
            evolve_nonlinear(bumps(0.01), G, P, SolverConfig(T=1.0, max_amplitude=0.001))

    def test_guard_violation_mid_run(self):
        b = np.exp(-(G.x**2) / 2)
        init = StateTriple(np.zeros(G.N), 0.2 * b, np.zeros(G.N), PERTURBATION)
        with pytest.raises(GuardViolation) as info:
            evolve_nonlinear(init, G, P, SolverConfig(T=5.0, v_bounds=(0.5, 1.02), snapshot_stride=1))
        exc = info.value
        assert 0 < exc.time < 5.0
        assert exc.trajectory is not None and not exc.trajectory.completed
        assert len(exc.trajectory) >= 1

    def test_non_finite_aborts(self):
        init = bumps(0.01)
        init.v[3] = np.nan
        with pytest.raises((StateValidityError, GuardViolation)):
            evolve_nonlinear(init, G, P, SolverConfig(T=1.0))


class TestParabolic:
    def test_phase_is_damped_heat(self):
        init = bumps(0.01)
        tr = evolve_parabolic(init, G, P, SolverConfig(T=3.0, snapshot_stride=50))
        for t, s in zip(tr.times, tr.states):
            np.testing.assert_allclose(s.phi, damped_heat_apply(init.phi, G, t, P.eps, P.eps), atol=1e-16)

    def test_zero_data(self):
        z = StateTriple(np.zeros(G.N), np.zeros(G.N), np.zeros(G.N), PERTURBATION)
        tr = evolve_parabolic(z, G, P, SolverConfig(T=1.0))
        assert np.abs(tr.states[-1].as_array()).max() == 0.0

    def test_small_amplitude_matches_linear(self):
        def dev(d0):
            init = bumps(d0)
            nl = final(evolve_parabolic(init, G, P, SolverConfig(T=10.0, snapshot_stride=10**6)))[:2]
            lin = np.stack(evolve_linear((init.v, init.u), G, 10.0, P, PARABOLIC))
            return np.sqrt(np.sum((nl - lin) ** 2))

        assert 3.2 <= dev(0.01) / dev(0.005) <= 4.8

    def test_mean_conservation(self):
        init = bumps(0.02)
        tr = evolve_parabolic(init, G, P, SolverConfig(T=10.0, snapshot_stride=100))
        m0 = init.as_array()[:2].mean(axis=1)
        drift = np.abs(tr.states[-1].as_array()[:2].mean(axis=1) - m0).max()
        assert drift <= 1e-11


class TestLinear:
    def test_time_zero(self):
        init = bumps()
        n, w = evolve_linear((init.v, init.u), G, 0.0, P)
        np.testing.assert_allclose(n, init.v, atol=1e-17)
        np.testing.assert_allclose(w, init.u, atol=1e-17)

    def test_semigroup(self):
        init = bumps()
        W0 = (init.v, init.u)
        a = np.stack(evolve_linear(W0, G, 3.5, P))
        b = np.stack(evolve_linear(evolve_linear(W0, G, 1.2, P), G, 2.3, P))
        assert np.abs(a - b).max() <= 1e-10 * np.abs(a).max()

    def test_decay_exponent(self):
        from nsaclab.decay import NormSeries, fit_rate

        g = Grid1D(1000.0, 4096, -500.0)
        init = bumps(grid=g)
        ts = np.arange(50.0, 301.0, 5.0)
        vals = []
        for t in ts:
            n, w = evolve_linear((init.v, init.u), g, t, P)
            f = np.stack([n - n.mean(), w - w.mean()])
            vals.append(np.sqrt(np.sum(f**2) * g.dx))
        assert fit_rate(NormSeries(ts, vals), window=(50, 300)).fit == pytest.approx(-0.25, abs=0.1)

    def test_linear_matches_small_nonlinear(self):
        init = bumps(1e-6)
        nl = final(evolve_nonlinear(init, G, P, SolverConfig(T=4.0)))
        lin = evolve_linear_state(init, G, 4.0, P).as_array()
        assert np.abs(nl - lin).max() <= 1e-6 * 1e-3


class TestResume:
    def test_resume_matches_uninterrupted(self, tmp_path):
        init = bumps(0.02)
        cfg_full = SolverConfig(T=2.0, snapshot_stride=25)
        full = final(evolve_nonlinear(init, G, P, cfg_full))

        store = SnapshotStore(tmp_path / "snaps")
        evolve_nonlinear(init, G, P, SolverConfig(T=1.0, snapshot_stride=25), store=store)
        n_first = len(store)
        t0, last = store.last()
        assert t0 == pytest.approx(1.0)
        resumed = evolve_nonlinear(last, G, P, cfg_full, store=store, t0=t0)
        assert resumed.times[0] == pytest.approx(1.0) and resumed.times[-1] == pytest.approx(2.0)
        # the resume point is not written twice
        assert len(store) == n_first + 2
        times = [store.load(k)[0] for k in range(len(store))]
        assert np.all(np.diff(times) > 0)
        assert np.abs(final(resumed) - full).max() <= 1e-14

    def test_stepper_time(self):
        s = NSACStepper(bumps(), G, P, SolverConfig(), t0=5.0)
        s.step()
        assert s.t == pytest.approx(5.02)
        q = ParabolicStepper(bumps(), G, P, SolverConfig())
        q.step()
        assert q.perturbation_state().representation == PERTURBATION

    def test_primitive_snapshots_round_trip(self, tmp_path):
        store = SnapshotStore(tmp_path)
        init = convert_representation(bumps(), P)
        tr = evolve_nonlinear(init, G, P, SolverConfig(T=0.4, snapshot_stride=10), PRIMITIVE, store=store)
        t, s = store.last()
        assert s.representation == PRIMITIVE
        np.testing.assert_array_equal(s.as_array(), tr.states[-1].as_array())
