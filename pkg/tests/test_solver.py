import math

import numpy as np
import pytest

from ermakov.catalog import ISO_HO_OSC_INIT, KEPLER_ECCENTRIC_INIT
from ermakov.dynamics import IntegratorConfig, integrate, series_drift
from ermakov.errors import (
    AngularTurning,
    ForbiddenRegion,
    InconsistentEnergy,
    ValidationError,
)
from ermakov.geometry import CartesianState, psi_sq, to_polar
from ermakov.invariants import ermakov_I_cart, noether_J
from ermakov.model import validate_model
from ermakov.solver import (
    EffectivePotential,
    RadialSolution,
    rescale_time,
    solve_angular,
    solve_by_quadrature,
    solve_radial,
)

TIGHT = IntegratorConfig(rel_tol=1e-12, abs_tol=1e-12)


class TestRescaleTime:
    def test_unit_rho(self, fixtures):
        m = fixtures["iso_ho"].model
        assert rescale_time(m, 3.7, 0.0) == pytest.approx(3.7, rel=1e-14)

    def test_sqrt_rho(self):
        m = validate_model(form=(1, 0, 1), rho="sqrt(1+t^2)", U="s^2/2")
        for t in (0.5, 1.0, 4.0):
            assert rescale_time(m, t, 0.0) == pytest.approx(math.atan(t), rel=1e-12)

    def test_exponential_rho(self):
        m = validate_model(form=(1, 0, 1), rho="exp(t)", U="s^2/2")
        assert rescale_time(m, 1.0, 0.0) == pytest.approx(
            (1.0 - math.exp(-2.0)) / 2.0, rel=1e-12
        )

    def test_requires_point_symmetric(self):
        m = validate_model(form=(1, 0, 1), vbar="0")
        with pytest.raises(ValidationError):
            rescale_time(m, 1.0)


class TestSolveRadial:
    def test_degenerate_circular(self, fixtures):
        m = fixtures["iso_ho"].model
        # I = 1/2, J = 1, min W at Rbar = 1
        sol = solve_radial(m, 0.5, 1.0, 1.0, 0.0, (0.0, 10.0))
        assert sol.kind == "circular"
        for T in np.linspace(0.0, 10.0, 7):
            rbar, d = sol.value(T)
            assert rbar == 1.0 and d == 0.0

    def test_oscillatory_turning_points(self, fixtures):
        m = fixtures["iso_ho"].model
        s = ISO_HO_OSC_INIT
        I = ermakov_I_cart(s, m)
        J = noether_J(s, m)
        assert J == pytest.approx(1.25, abs=1e-14)
        sol = solve_radial(m, I, J, 1.0, math.sqrt(0.5), (0.0, 10.0))
        lo, hi = sol.turning_points
        assert lo * lo == pytest.approx(0.5, rel=1e-11)
        assert hi * hi == pytest.approx(2.0, rel=1e-11)

    def test_kepler_circular_double_root(self, fixtures):
        m = fixtures["kepler"].model
        sol = solve_radial(m, 0.5, -0.5, 1.0, 0.0, (0.0, 10.0))
        assert sol.kind == "circular"
        assert sol.turning_points == [1.0]

    def test_energy_consistency_along_table(self, fixtures):
        m = fixtures["kepler"].model
        s = KEPLER_ECCENTRIC_INIT
        I = ermakov_I_cart(s, m)
        J = noether_J(s, m)
        sol = solve_radial(m, I, J, 1.0, 0.0, (0.0, 10.0))
        w = EffectivePotential(m, I)
        for T in np.linspace(0.05, 9.95, 40):
            rbar, d = sol.value(T)
            assert 0.5 * d * d + w.w(rbar) == pytest.approx(J, abs=1e-9)

    def test_inconsistent_energy(self, fixtures):
        m = fixtures["iso_ho"].model
        with pytest.raises(InconsistentEnergy):
            solve_radial(m, 0.5, 1.25, 1.0, 0.9, (0.0, 1.0))

    def test_forbidden_region(self, fixtures):
        m = fixtures["iso_ho"].model
        with pytest.raises(ForbiddenRegion):
            RadialSolution(m, 0.5, 0.9, 1.0, 0.0, 1.0)


class TestSolveAngular:
    def test_circular_uniform_rotation(self, fixtures):
        m = fixtures["iso_ho"].model
        radial = solve_radial(m, 0.5, 1.0, 1.0, 0.0, (0.0, 10.0))
        ang = solve_angular(m, 0.5, 0.0, radial, (0.0, 10.0), direction=1.0)
        for T in np.linspace(0.0, 10.0, 11):
            assert ang.theta_of_T(T) == pytest.approx(T, abs=1e-10)

    def test_constant_h_phase(self, fixtures):
        # f = g = 0, identity form: Phi(theta) = (theta - theta0)/sqrt(2 I)
        m = fixtures["iso_ho"].model
        radial = solve_radial(m, 0.72, 1.3, 1.0, math.sqrt(2 * (1.3 - 0.5 - 0.72)),
                              (0.0, 4.0))
        ang = solve_angular(m, 0.72, 0.3, radial, (0.0, 4.0), direction=1.0)
        for theta in (0.5, 1.2, 2.2):
            expected = (theta - 0.3) / math.sqrt(2 * 0.72)
            assert ang.phi_of_theta(theta) == pytest.approx(expected, rel=1e-11)

    def test_zero_thetadot_rejected(self, fixtures):
        m = fixtures["iso_ho"].model
        radial = solve_radial(m, 0.5, 1.0, 1.0, 0.0, (0.0, 1.0))
        with pytest.raises(AngularTurning):
            solve_angular(m, 0.5, 0.0, radial, (0.0, 1.0), direction=0.0)

    def test_gen_fg_theta_vs_direct(self, fixtures):
        # oracle: the direct integrator, on a window where theta is monotone
        fx = fixtures["gen_fg"]
        m = fx.model
        init = fx.init
        tr = solve_by_quadrature(m, init, (0.0, 0.8), samples=33)
        direct = integrate(m, init, (0.0, 0.8), TIGHT)
        grid = direct.sample(tr.t)
        thetas_direct = np.arctan2(grid[:, 1], grid[:, 0])
        thetas_quad = np.array(
            [to_polar(tr.state(k), m.form).theta for k in range(len(tr))]
        )
        assert np.max(np.abs(thetas_direct - thetas_quad)) <= 1e-6

    def test_angular_turning_reported(self, fixtures):
        # gen_fg theta oscillates; a long span must hit the turning angle
        fx = fixtures["gen_fg"]
        with pytest.raises(AngularTurning) as exc:
            solve_by_quadrature(fx.model, fx.init, (0.0, 10.0), samples=101)
        assert exc.value.theta is not None


class TestSolveByQuadrature:
    def test_iso_ho_circular(self, fixtures):
        m = fixtures["iso_ho"].model
        tr = solve_by_quadrature(m, CartesianState(1, 0, 0, 1), (0.0, 10.0),
                                 samples=101)
        for k, t in enumerate(tr.t):
            assert abs(tr.states[k][0] - math.cos(t)) < 1e-8
            assert abs(tr.states[k][1] - math.sin(t)) < 1e-8

    def test_iso_ho_oscillatory_vs_direct(self, fixtures):
        m = fixtures["iso_ho"].model
        tr = solve_by_quadrature(m, ISO_HO_OSC_INIT, (0.0, 10.0), samples=201)
        direct = integrate(m, ISO_HO_OSC_INIT, (0.0, 10.0), TIGHT)
        grid = direct.sample(tr.t)
        assert np.max(np.abs(grid[:, :2] - np.asarray(tr.states)[:, :2])) <= 1e-6

    def test_kepler_eccentric_vs_direct(self, fixtures):
        m = fixtures["kepler"].model
        tr = solve_by_quadrature(m, KEPLER_ECCENTRIC_INIT, (0.0, 10.0), samples=201)
        direct = integrate(m, KEPLER_ECCENTRIC_INIT, (0.0, 10.0), TIGHT)
        grid = direct.sample(tr.t)
        assert np.max(np.abs(grid[:, :2] - np.asarray(tr.states)[:, :2])) <= 1e-6

    def test_kepler_unbounded_vs_direct(self, fixtures):
        # hyperbolic orbit exercises the missing outer turning point
        m = fixtures["kepler"].model
        init = CartesianState(1.0, 0.0, 0.0, 1.5)
        tr = solve_by_quadrature(m, init, (0.0, 5.0), samples=101)
        assert tr.detail.radial.kind == "unbounded"
        direct = integrate(m, init, (0.0, 5.0), TIGHT)
        grid = direct.sample(tr.t)
        assert np.max(np.abs(grid[:, :2] - np.asarray(tr.states)[:, :2])) <= 1e-6

    def test_invariants_on_reconstruction(self, fixtures):
        m = fixtures["kepler"].model
        tr = solve_by_quadrature(m, KEPLER_ECCENTRIC_INIT, (0.0, 10.0), samples=101)
        assert series_drift(tr.I) <= 1e-8
        assert series_drift(tr.J) <= 1e-9

    def test_h_sign_convention(self, fixtures):
        # the polar invariant evaluated on reconstructed states returns I
        fx = fixtures["hyperbolic"]
        m = fx.model
        init = fx.init
        I0 = ermakov_I_cart(init, m)
        tr = solve_by_quadrature(m, init, (0.0, 0.84), samples=41)
        for k in range(len(tr)):
            p = to_polar(tr.state(k), m.form)
            kin = 0.5 * (p.R ** 2 * psi_sq(p.theta, m.form) * p.thetadot) ** 2
            val = kin + m.F(math.tan(p.theta)) + m.G(1.0 / math.tan(p.theta))
            assert val == pytest.approx(I0, abs=1e-9)

    def test_hyperbolic_vs_direct(self, fixtures):
        fx = fixtures["hyperbolic"]
        tr = solve_by_quadrature(fx.model, fx.init, (0.0, 0.84), samples=41)
        direct = integrate(fx.model, fx.init, (0.0, 0.84), TIGHT)
        grid = direct.sample(tr.t)
        assert np.max(np.abs(grid[:, :2] - np.asarray(tr.states)[:, :2])) <= 1e-6

    def test_nonconstant_rho_vs_direct(self, fixtures):
        fx = fixtures["tdho"]
        tr = solve_by_quadrature(fx.model, fx.init, (0.0, 8.0), samples=101)
        direct = integrate(fx.model, fx.init, (0.0, 8.0), TIGHT)
        grid = direct.sample(tr.t)
        assert np.max(np.abs(grid[:, :2] - np.asarray(tr.states)[:, :2])) <= 1e-6

    def test_requires_point_symmetric(self):
        m = validate_model(form=(1, 0, 1), vbar="R^2/2")
        with pytest.raises(ValidationError):
            solve_by_quadrature(m, CartesianState(1, 0, 0, 1), (0.0, 1.0))
