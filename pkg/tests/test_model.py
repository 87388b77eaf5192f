import math

import numpy as np
import pytest

from ermakov.errors import (
    AxisSingularity,
    DegenerateDirection,
    NonPositiveRho,
    ValidationError,
)
from ermakov.exprdsl import Antiderivative, parse_expr
from ermakov.model import (
    InverseSquareCoulomb,
    InverseSquareHarmonic,
    omega_sq,
    potential,
    sigma,
    validate_model,
)


@pytest.fixture(scope="module")
def iso_ho():
    return validate_model(form=(1, 0, 1), rho="1", U="s^2/2")


@pytest.fixture(scope="module")
def kepler():
    return validate_model(form=(1, 0, 1), rho="1", U=InverseSquareCoulomb(0.0, 1.0))


class TestValidate:
    def test_iso_ho_valid(self, iso_ho):
        assert iso_ho.kappa == 1.0
        assert iso_ho.f_zero and iso_ho.g_zero

    def test_kappa_zero_rejected(self):
        with pytest.raises(ValidationError) as exc:
            validate_model(form=(1, 1, 1), rho="1", U="s^2/2")
        assert "kappa" in str(exc.value)

    def test_hyperbolic_valid(self):
        m = validate_model(form=(0, 1, 0), rho="1", U="5/s^2 + s^2/2")
        assert m.kappa == -1.0

    def test_all_problems_reported(self):
        with pytest.raises(ValidationError) as exc:
            validate_model(form=(1, 1, 1), f="1/(s", g="lambda", vbar="R^2",
                           rho="1", U="s")
        msgs = exc.value.problems
        assert len(msgs) >= 3  # kappa, f parse, conflicting potential

    def test_potential_required(self):
        with pytest.raises(ValidationError):
            validate_model(form=(1, 0, 1))

    def test_syntactic_zero_detection(self):
        m = validate_model(form=(1, 0, 1), f="0*lambda", g="(2 - 2)*sin(lambda)",
                           rho="1", U="s^2/2")
        assert m.f_zero and m.g_zero
        # algebraic cancellation is not constant folding: stays non-zero
        m2 = validate_model(form=(1, 0, 1), f="lambda - lambda", rho="1", U="s^2/2")
        assert not m2.f_zero


class TestSigma:
    def test_zero_couplings(self, iso_ho):
        for theta in (0.0, 0.3, math.pi / 2, -1.2):
            assert sigma(theta, iso_ho) == 0.0

    def test_constant_f(self):
        m = validate_model(form=(1, 0, 1), f="1", vbar="0")
        assert sigma(math.pi / 4, m) == pytest.approx(2.0, rel=1e-14)

    def test_axis_with_coupling(self):
        m = validate_model(form=(1, 0, 1), f="1", vbar="0")
        with pytest.raises(AxisSingularity):
            sigma(0.0, m)

    def test_hyperbolic_term_by_term(self):
        # independent numeric oracle: rebuild each term of sigma directly
        m = validate_model(form=(0, 1, 0), f="lambda", g="0", rho="1",
                           U="5/s^2 + s^2/2")
        theta = math.pi / 3
        A, B, C, k = 0.0, 1.0, 0.0, -1.0
        c, s = math.cos(theta), math.sin(theta)
        d = A * c * c + 2 * B * s * c + C * s * s
        F = Antiderivative(parse_expr("lambda", {"lambda"}), "lambda", 1.0)
        expected = (A * c + B * s) * d * (s / c) / (s * c * c) - 2 * k * F(s / c)
        assert sigma(theta, m) == pytest.approx(expected, rel=1e-12)

    def test_scale_invariance(self, rng):
        # sigma depends on theta only: omega^2 * R^4 - R^3 dvbar/dR constant
        m = validate_model(form=(2, 0.5, 1), f="lambda", g="lambda^2", vbar="0")
        for _ in range(20):
            theta = rng.uniform(0.2, 1.3)
            s1 = m.omega_sq(1.0, theta, 0.0) * 1.0
            s2 = m.omega_sq(2.0, theta, 0.0) * 16.0
            assert s1 == pytest.approx(s2, rel=1e-11, abs=1e-11)


class TestOmegaSq:
    def test_iso_ho_everywhere(self, iso_ho, rng):
        for _ in range(10):
            R = rng.uniform(0.3, 2.5)
            theta = rng.uniform(-3, 3)
            assert omega_sq(R, theta, 0.0, iso_ho) == pytest.approx(1.0, rel=1e-14)

    def test_kepler_closed_form(self, kepler):
        assert omega_sq(2.0, 0.7, 0.0, kepler) == pytest.approx(0.125, rel=1e-14)

    def test_coupled_case(self):
        m = validate_model(form=(1, 0, 1), f="1", vbar="0")
        assert omega_sq(1.0, math.pi / 4, 0.0, m) == pytest.approx(2.0, rel=1e-14)

    def test_requires_positive_R(self, iso_ho):
        with pytest.raises(DegenerateDirection):
            omega_sq(0.0, 0.3, 0.0, iso_ho)


class TestPotential:
    def test_iso_ho(self, iso_ho):
        assert potential(1.0, 0.0, 0.0, iso_ho) == pytest.approx(0.5, abs=1e-15)

    def test_kepler(self, kepler):
        x, y = 2.0 * math.cos(0.4), 2.0 * math.sin(0.4)
        assert potential(x, y, 0.0, kepler) == pytest.approx(-0.5, rel=1e-14)

    def test_reference_limit_zero(self):
        m = validate_model(form=(1, 0, 1), f="lambda", vbar="0")
        assert potential(1.0, 1.0, 0.0, m) == pytest.approx(0.0, abs=1e-14)

    def test_axis_guard(self):
        m = validate_model(form=(1, 0, 1), f="lambda", vbar="0")
        with pytest.raises(AxisSingularity):
            potential(0.0, 1.0, 0.0, m)

    def test_polar_cartesian_identity(self, rng):
        m = validate_model(form=(2, 0.5, 1), f="lambda", g="lambda", vbar="R^2/3")
        for _ in range(50):
            x, y = rng.uniform(0.3, 1.5, 2)
            R2 = 2 * x * x + 2 * 0.5 * x * y + y * y
            theta = math.atan2(y, x)
            via_polar = m.vbar(math.sqrt(R2), 0.0) + m.kappa / R2 * (
                m.F(math.tan(theta)) + m.G(1.0 / math.tan(theta))
            )
            assert potential(x, y, 0.0, m) == pytest.approx(via_polar, rel=1e-12)

    def test_time_independent_when_rho_constant(self, iso_ho, rng):
        for _ in range(10):
            x, y = rng.uniform(0.3, 1.5, 2)
            t = rng.uniform(-5, 5)
            assert potential(x, y, t, iso_ho) == potential(x, y, 0.0, iso_ho)
            assert omega_sq(1.3, 0.4, t, iso_ho) == omega_sq(1.3, 0.4, 0.0, iso_ho)


class TestGradients:
    def test_grad_V_matches_finite_differences(self, rng):
        models = [
            validate_model(form=(1, 0, 1), rho="1", U="s^2/2"),
            validate_model(form=(2, 0.5, 1), f="lambda", g="lambda^2", vbar="R^2/2"),
            validate_model(form=(1, 0, 1), f="lambda", rho="sqrt(1+t^2)", U="2*s^2"),
        ]
        h = 1e-6
        for m in models:
            for _ in range(25):
                x, y = rng.uniform(0.4, 1.5, 2)
                t = rng.uniform(0.0, 2.0)
                gx, gy = m.grad_V(x, y, t)
                fx = (m.potential_cart(x + h, y, t) - m.potential_cart(x - h, y, t)) / (2 * h)
                fy = (m.potential_cart(x, y + h, t) - m.potential_cart(x, y - h, t)) / (2 * h)
                assert gx == pytest.approx(fx, rel=2e-9, abs=2e-9)
                assert gy == pytest.approx(fy, rel=2e-9, abs=2e-9)

    def test_dV_dt_matches_finite_differences(self, rng):
        m = validate_model(form=(1, 0, 1), rho="sqrt(1+t^2)", U="2*s^2")
        h = 1e-6
        for _ in range(25):
            x, y = rng.uniform(0.4, 1.5, 2)
            t = rng.uniform(0.1, 2.0)
            g = m.dV_dt(x, y, t)
            fd = (m.potential_cart(x, y, t + h) - m.potential_cart(x, y, t - h)) / (2 * h)
            assert g == pytest.approx(fd, rel=2e-9, abs=2e-9)


class TestUVariants:
    def test_coulomb_matches_expression(self):
        mp = validate_model(form=(1, 0, 1), rho="1", U=InverseSquareCoulomb(2.0, 3.0))
        me = validate_model(form=(1, 0, 1), rho="1", U="2/s^2 - 3/s")
        for s in (0.5, 1.0, 1.7):
            assert mp.u_val(s) == pytest.approx(me.u_val(s), rel=1e-14)
            assert mp.u_prime(s) == pytest.approx(me.u_prime(s), rel=1e-14)

    def test_harmonic_matches_expression(self):
        mp = validate_model(form=(1, 0, 1), rho="1", U=InverseSquareHarmonic(5.0, 1.0))
        me = validate_model(form=(1, 0, 1), rho="1", U="5/s^2 + s^2/2")
        for s in (0.5, 1.0, 1.7):
            assert mp.u_val(s) == pytest.approx(me.u_val(s), rel=1e-14)
            assert mp.u_prime(s) == pytest.approx(me.u_prime(s), rel=1e-14)


class TestRho:
    def test_positive_enforced(self):
        m = validate_model(form=(1, 0, 1), rho="cos(t)", U="s^2/2")
        assert m.rho_val(0.0) == 1.0
        with pytest.raises(NonPositiveRho):
            m.rho_val(2.0)

    def test_constant_rho_rejected_if_nonpositive(self):
        with pytest.raises(ValidationError):
            validate_model(form=(1, 0, 1), rho="-1", U="s^2/2")

    def test_derivatives(self):
        m = validate_model(form=(1, 0, 1), rho="sqrt(1+t^2)", U="s^2/2")
        t = 0.7
        r = math.sqrt(1 + t * t)
        rho, rd, rdd = m.rho_derivs(t)
        assert rho == pytest.approx(r, rel=1e-15)
        assert rd == pytest.approx(t / r, rel=1e-14)
        assert rdd == pytest.approx(1.0 / r ** 3, rel=1e-13)
        assert m.rho_third(t) == pytest.approx(-3 * t / r ** 5, rel=1e-12)
