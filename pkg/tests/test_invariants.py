import pytest

from ermakov.errors import AxisSingularity
from ermakov.geometry import CartesianState, to_polar
from ermakov.invariants import (
    ermakov_I_cart,
    ermakov_I_polar,
    hamiltonian,
    hamiltonian_canonical,
    noether_J,
)
from ermakov.model import validate_model



@pytest.fixture(scope="module")
def free_model():
    return validate_model(form=(1, 0, 1), vbar="0")


class TestErmakovICart:
    def test_circular(self, free_model):
        s = CartesianState(1.0, 0.0, 0.0, 1.0)
        assert ermakov_I_cart(s, free_model) == 0.5

    def test_radial_motion(self, free_model):
        s = CartesianState(1.0, 1.0, 2.0, 2.0)
        assert ermakov_I_cart(s, free_model) == 0.0

    def test_coupling_contribution(self):
        m = validate_model(form=(1, 0, 1), f="lambda", vbar="0")
        s = CartesianState(1.0, 2.0, 0.0, 0.0)
        assert ermakov_I_cart(s, m) == pytest.approx(1.5, abs=1e-12)

    def test_axis_singularity(self):
        m = validate_model(form=(1, 0, 1), f="lambda", vbar="0")
        with pytest.raises(AxisSingularity):
            ermakov_I_cart(CartesianState(0.0, 1.0, 0.0, 0.0), m)

    def test_lower_limit_shift_is_constant(self, rng):
        m1 = validate_model(form=(1, 0, 1), f="lambda", vbar="0", lambda0_f=1.0)
        m2 = validate_model(form=(1, 0, 1), f="lambda", vbar="0", lambda0_f=2.0)
        shift = -(2.0 ** 2 - 1.0) / 2.0  # -integral_1^2 lambda dlambda
        for _ in range(2):
            x, y = rng.uniform(0.4, 1.5, 2)
            vx, vy = rng.uniform(-1, 1, 2)
            s = CartesianState(x, y, vx, vy)
            d = ermakov_I_cart(s, m2) - ermakov_I_cart(s, m1)
            assert d == pytest.approx(shift, abs=1e-12)


class TestPolarEquality:
    def test_circular(self, free_model):
        from ermakov.geometry import PolarState

        p = PolarState(1.0, 0.0, 0.0, 1.0)
        assert ermakov_I_polar(p, free_model) == 0.5

    def test_hyperbolic_cone(self):
        m = validate_model(form=(0, 1, 0), vbar="0")
        s = CartesianState(1.0, 1.3, 0.4, -0.2)
        p = to_polar(s, m.form)
        from ermakov.geometry import psi_sq

        expected = 0.5 * (p.R ** 2 * psi_sq(p.theta, m.form) * p.thetadot) ** 2
        assert ermakov_I_polar(p, m) == pytest.approx(expected, rel=1e-14)
        assert ermakov_I_polar(p, m) == pytest.approx(
            ermakov_I_cart(s, m), rel=1e-13
        )

    def test_mass_equality(self, rng, definite_form_factory):
        # 1000 random states and models
        for _ in range(100):
            form = definite_form_factory(rng)
            m = validate_model(form=form, f="lambda", g="lambda", vbar="0")
            for _ in range(10):
                x, y = rng.uniform(0.3, 1.6, 2)
                vx, vy = rng.uniform(-1.5, 1.5, 2)
                s = CartesianState(x, y, vx, vy)
                icart = ermakov_I_cart(s, m)
                ipolar = ermakov_I_polar(to_polar(s, form), m)
                assert abs(icart - ipolar) <= 1e-12 * max(1.0, abs(icart))


class TestNoetherJ:
    def test_iso_ho_circular(self, fixtures):
        m = fixtures["iso_ho"].model
        assert noether_J(CartesianState(1, 0, 0, 1), m) == pytest.approx(1.0,
                                                                         abs=1e-14)

    def test_kepler_circular(self, fixtures):
        m = fixtures["kepler"].model
        assert noether_J(CartesianState(1, 0, 0, 1), m) == pytest.approx(-0.5,
                                                                         abs=1e-14)

    def test_iso_ho_with_radial_velocity(self, fixtures):
        m = fixtures["iso_ho"].model
        assert noether_J(CartesianState(1, 0, 1, 1), m) == pytest.approx(1.5,
                                                                         abs=1e-14)

    def test_requires_point_symmetric(self, free_model):
        from ermakov.errors import ValidationError

        with pytest.raises(ValidationError):
            noether_J(CartesianState(1, 0, 0, 1), free_model)


class TestHamiltonian:
    def test_iso_ho_circular(self, fixtures):
        m = fixtures["iso_ho"].model
        assert hamiltonian(CartesianState(1, 0, 0, 1), m) == pytest.approx(
            1.0, abs=1e-14
        )

    def test_equals_J_for_static_rho(self, fixtures, rng):
        for name in ("iso_ho", "kepler", "hyperbolic", "gen_fg"):
            fx = fixtures[name]
            for s in fx.sample_states(10, rng):
                assert hamiltonian(s, fx.model) == pytest.approx(
                    noether_J(s, fx.model), rel=1e-12, abs=1e-12
                )

    def test_canonical_kinetic_identity(self):
        m = validate_model(form=(1, 0, 1), rho="1", U="s^2/2")
        s = CartesianState(1.0, 0.0, 1.0, 0.0)
        # px = 1, kinetic part 1/2, potential 1/2
        assert hamiltonian_canonical(s, m) == pytest.approx(1.0, abs=1e-14)

    def test_velocity_vs_phase_space_form(self, fixtures, rng):
        for name in ("iso_ho", "kepler", "hyperbolic", "gen_fg", "tdho"):
            fx = fixtures[name]
            for s in fx.sample_states(20, rng, t_span=(0.0, 2.0)):
                hv = hamiltonian(s, fx.model)
                hc = hamiltonian_canonical(s, fx.model)
                assert abs(hv - hc) <= 1e-12 * max(1.0, abs(hv))

    def test_cross_term_form(self, rng):
        # non-diagonal metric exercises the -2B px py term
        m = validate_model(form=(2, 0.5, 1), f="lambda", g="lambda", rho="1",
                           U="s^2/2")
        for _ in range(50):
            x, y = rng.uniform(0.4, 1.4, 2)
            vx, vy = rng.uniform(-1, 1, 2)
            s = CartesianState(x, y, vx, vy)
            hv = hamiltonian(s, m)
            hc = hamiltonian_canonical(s, m)
            assert abs(hv - hc) <= 1e-12 * max(1.0, abs(hv))
