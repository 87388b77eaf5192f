"""Acceptance suite: every top-level claim at its stated tolerance.

Run `pytest tests/test_acceptance.py -v -s` for one PASS/FAIL line per
criterion with the measured values.
"""

import math
import time

import numpy as np
import pytest

from ermakov import catalog
from ermakov.catalog import (
    ISO_HO_CIRCULAR_INIT,
    ISO_HO_OSC_INIT,
    KEPLER_CIRCULAR_INIT,
    KEPLER_ECCENTRIC_INIT,
)
from ermakov.dynamics import IntegratorConfig, drift_report, eom_rhs, integrate
from ermakov.exprdsl import Num, Var
from ermakov.geometry import CartesianState, to_polar
from ermakov.invariants import (
    ermakov_I_cart,
    ermakov_I_polar,
    hamiltonian,
    hamiltonian_canonical,
    noether_J,
)
from ermakov.linearize import (
    alpha_solve,
    classify_linearisable,
    integrate_linear,
    linear_form_residual,
)
from ermakov.model import validate_model
from ermakov.noether import (
    ConstField,
    ExprField,
    converse_generator,
    corrupted_point_symmetry,
    generator_polar_components,
    noether_residual,
    phase_catalog,
    point_symmetry,
    poisson_bracket,
)
from ermakov.solver import solve_by_quadrature

SEED = 2026
TIGHT = IntegratorConfig(rel_tol=1e-12, abs_tol=1e-12)
PROTOCOL_CFG = IntegratorConfig(rel_tol=1e-10, abs_tol=1e-10)

CRITERION_1_FIXTURES = ("iso_ho", "kepler", "hyperbolic", "gen_fg")
ALL_FIXTURES = ("iso_ho", "kepler", "hyperbolic", "gen_fg", "tdho")


def _report(num, passed, text):
    print(f"\n[{'PASS' if passed else 'FAIL'}] criterion {num}: {text}")
    assert passed, f"criterion {num}: {text}"


@pytest.fixture(scope="module")
def protocol_runs():
    """10 seeded states per fixture integrated over t in [0, 20] at 1e-10."""
    runs = {}
    timings = {}
    for name in ALL_FIXTURES:
        fx = catalog.get(name)
        rng = np.random.default_rng(SEED)
        t0 = time.perf_counter()
        trs = [
            integrate(fx.model, s, (0.0, 20.0), PROTOCOL_CFG)
            for s in fx.sample_states(10, rng)
        ]
        timings[name] = time.perf_counter() - t0
        runs[name] = trs
    return runs, timings


@pytest.fixture(scope="module")
def rich_td_model():
    return validate_model(form=(1, 0, 1), f="lambda", g="lambda",
                          rho="sqrt(1+t^2)", U="2*s^2")


def _seeded_states(fx, n, t_span=(0.0, 3.0)):
    rng = np.random.default_rng(SEED)
    return fx.sample_states(n, rng, t_span=t_span)


def _tau_r2thetadot(m):
    x, y, vx, vy = Var("x"), Var("y"), Var("xdot"), Var("ydot")
    r2 = Num(m.A) * x * x + Num(2.0 * m.B) * x * y + Num(m.C) * y * y
    return ExprField(r2 * (x * vy - y * vx) / (x * x + y * y))


def test_criterion_1_ermakov_invariant_conservation(protocol_runs):
    runs, timings = protocol_runs
    worst = 0.0
    for name in CRITERION_1_FIXTURES:
        for tr in runs[name]:
            worst = max(worst, drift_report(tr)["I"]["max_drift"])
    runtime = sum(timings[name] for name in CRITERION_1_FIXTURES)
    _report(
        1,
        worst <= 1e-8 and runtime < 10.0,
        f"Ermakov invariant drift over t in [0,20] at tol 1e-10: "
        f"max {worst:.3e} <= 1e-8 across 4 fixtures x 10 seeded states "
        f"(runtime {runtime:.2f}s < 10s)",
    )


def test_criterion_2_noether_invariant_conservation(protocol_runs):
    runs, _ = protocol_runs
    worst = 0.0
    for name in ALL_FIXTURES:  # includes tdho with rho = sqrt(1+t^2)
        for tr in runs[name]:
            worst = max(worst, drift_report(tr)["J"]["max_drift"])
    _report(
        2,
        worst <= 1e-8,
        f"Noether invariant drift, point-symmetric fixtures incl. "
        f"rho = sqrt(1+t^2): max {worst:.3e} <= 1e-8",
    )


def test_criterion_3_noether_criterion_residual(rich_td_model):
    models = {
        "hyperbolic": catalog.get("hyperbolic").model,
        "gen_fg": catalog.get("gen_fg").model,
        "tdho": catalog.get("tdho").model,
        "rich_td": rich_td_model,
    }
    states = {
        name: _seeded_states(catalog.get(name), 250)
        for name in ("hyperbolic", "gen_fg", "tdho")
    }
    rng = np.random.default_rng(SEED)
    states["rich_td"] = [
        CartesianState(*rng.uniform(0.5, 1.5, 2), *rng.uniform(-1, 1, 2),
                       rng.uniform(0, 3))
        for _ in range(250)
    ]
    worst = 0.0
    count = 0
    for name, m in models.items():
        gen = point_symmetry(m)
        for s in states[name]:
            r = abs(noether_residual(gen, s, m)) / (1.0 + abs(m.lagrangian(s)))
            worst = max(worst, r)
            count += 1
    # negative control: corrupted gauge must blow past 1e-3
    control = 0.0
    for name in ("tdho", "rich_td"):
        gen = corrupted_point_symmetry(models[name])
        for s in states[name]:
            control = max(control, abs(noether_residual(gen, s, models[name])))
    _report(
        3,
        worst <= 1e-9 and control > 1e-3 and count >= 1000,
        f"point-symmetry criterion residual at {count} seeded states: "
        f"max {worst:.3e} <= 1e-9 (corrupted gauge control {control:.3e} > 1e-3)",
    )


def test_criterion_4_converse_theorem(rich_td_model):
    models = [rich_td_model, catalog.get("hyperbolic").model]
    worst = 0.0
    for m in models:
        taus = [ConstField(0.0), ConstField(1.0), _tau_r2thetadot(m)]
        rng = np.random.default_rng(SEED)
        if m is rich_td_model:
            states = [
                CartesianState(*rng.uniform(0.5, 1.5, 2),
                               *rng.uniform(-1, 1, 2), rng.uniform(0, 3))
                for _ in range(100)
            ]
        else:
            states = catalog.get("hyperbolic").sample_states(100, rng)
        for tau in taus:
            gen = converse_generator(m, tau)
            for s in states:
                dR, dth = generator_polar_components(gen, s, m)
                p = to_polar(s, m.form)
                tv = gen.tau.value(s, m)
                worst = max(
                    worst,
                    abs(dR - tv * p.Rdot),
                    abs(dth - (-p.R ** 2 * p.thetadot / m.kappa
                               + tv * p.thetadot)),
                )
    _report(
        4,
        worst <= 1e-10,
        f"converse-theorem generator matches the polar dynamical symmetry "
        f"componentwise for tau in {{0, 1, R^2*thetadot}}: max dev "
        f"{worst:.3e} <= 1e-10 at 100 seeded states per model",
    )


def test_criterion_5_involution():
    worst_ij = 0.0
    worst_canon = 0.0
    for name in ALL_FIXTURES:
        fx = catalog.get(name)
        m = fx.model
        cat = phase_catalog(m)
        for s in _seeded_states(fx, 100, t_span=(0.0, 2.0)):
            px, py = m.momenta(s)
            pt = (s.x, s.y, px, py, s.t)
            worst_ij = max(worst_ij, abs(poisson_bracket(cat["I"], cat["J"], pt)))
            worst_canon = max(
                worst_canon,
                abs(poisson_bracket(cat["x"], cat["px"], pt) - 1.0),
                abs(poisson_bracket(cat["I"], cat["I"], pt)),
            )
    _report(
        5,
        worst_ij <= 1e-8 and worst_canon <= 1e-12,
        f"involution: max |{{I,J}}| {worst_ij:.3e} <= 1e-8 at 100 phase "
        f"points per fixture; canonical checks off by {worst_canon:.3e} "
        f"<= 1e-12",
    )


def test_criterion_6_reduction_to_quadratures():
    m = catalog.get("iso_ho").model
    mk = catalog.get("kepler").model
    cases = [
        (m, ISO_HO_OSC_INIT, "iso_ho J=1.25"),
        (m, ISO_HO_CIRCULAR_INIT, "iso_ho J=1 circular"),
        (mk, KEPLER_CIRCULAR_INIT, "kepler"),
    ]
    t0 = time.perf_counter()
    worst = 0.0
    for model, init, _ in cases:
        tr = solve_by_quadrature(model, init, (0.0, 10.0), samples=201)
        direct = integrate(model, init, (0.0, 10.0), TIGHT)
        grid = direct.sample(tr.t)
        worst = max(
            worst, float(np.max(np.abs(grid[:, :2] - np.asarray(tr.states)[:, :2])))
        )
    runtime = time.perf_counter() - t0
    _report(
        6,
        worst <= 1e-6 and runtime < 5.0,
        f"quadrature vs direct over t in [0,10]: max |delta| {worst:.3e} "
        f"<= 1e-6 (runtime {runtime:.2f}s < 5s)",
    )


def test_criterion_7_linearization():
    mk = catalog.get("kepler").model
    cls = classify_linearisable(mk)
    # (a) conic oracle for e in {0, 0.21}
    worst_conic = 0.0
    for init, L, ecc in (
        (KEPLER_CIRCULAR_INIT, 1.0, 0.0),
        (KEPLER_ECCENTRIC_INIT, 1.1, 0.21),
    ):
        I = ermakov_I_cart(init, mk)
        al = alpha_solve(mk, cls, (0.0, 12.0))
        p0 = to_polar(init, mk.form)
        phi0 = al(0.0) / p0.R
        dphi0 = (al.d1(0.0) / p0.R - al(0.0) * p0.Rdot / p0.R ** 2) / p0.thetadot
        phi = integrate_linear(mk, I, cls, phi0, dphi0, (0.0, 2 * math.pi + 0.2))
        for theta in np.linspace(0.0, 2 * math.pi, 73):
            R = al(0.0) / float(phi(theta)[0])
            conic = L * L / (1.0 + ecc * math.cos(theta))
            worst_conic = max(worst_conic, abs(R - conic))
    ok_a = worst_conic <= 1e-8

    # (b) linear-form residual along direct trajectories
    worst_res = 0.0
    for name, window in (("kepler", (0.0, 8.0)), ("iso_ho", (0.0, 1.2)),
                         ("gen_fg", (0.0, 0.9)), ("hyperbolic", (0.0, 0.9))):
        fx = catalog.get(name)
        c = classify_linearisable(fx.model)
        al = alpha_solve(fx.model, c, window)
        I = ermakov_I_cart(fx.init, fx.model)
        tr = integrate(fx.model, fx.init, window, TIGHT)
        for k in range(0, len(tr), max(1, len(tr) // 30)):
            s = tr.state(k)
            p = to_polar(s, fx.model.form)
            if abs(p.thetadot) < 1e-3:
                continue
            res = linear_form_residual(s, fx.model, I, c, al)
            worst_res = max(worst_res, abs(res) / (1.0 + abs(al(s.t) / p.R)))
    ok_b = worst_res <= 1e-6

    # (c) classification tags
    tags = {
        "kepler": classify_linearisable(catalog.get("kepler").model),
        "iso_ho": classify_linearisable(catalog.get("iso_ho").model),
        "hyperbolic": classify_linearisable(catalog.get("hyperbolic").model),
        "quartic": classify_linearisable(
            validate_model(form=(1, 0, 1), rho="1", U="s^4")
        ),
    }
    ok_c = (
        tags["kepler"].tag == "U1"
        and tags["kepler"].b == 1.0
        and tags["iso_ho"].tag == "U2"
        and abs(tags["iso_ho"].c - 1.0) < 1e-10
        and tags["hyperbolic"].tag == "U2"
        and tags["hyperbolic"].a == 5.0
        and tags["quartic"].tag == "none"
    )
    _report(
        7,
        ok_a and ok_b and ok_c,
        f"linearization: conic mismatch {worst_conic:.3e} <= 1e-8 for "
        f"e in {{0, 0.21}}; linear-form residual {worst_res:.3e} <= 1e-6; "
        f"classification tags exact (U=s^4 -> NotLinearisable)",
    )


def test_criterion_8_representation_equality(definite_form_factory):
    rng = np.random.default_rng(SEED)
    worst = 0.0
    count = 0
    while count < 1000:
        form = definite_form_factory(rng)
        m = validate_model(form=form, f="lambda", g="lambda", vbar="0")
        for _ in range(10):
            x, y = rng.uniform(0.3, 1.6, 2)
            vx, vy = rng.uniform(-1.5, 1.5, 2)
            s = CartesianState(x, y, vx, vy)
            icart = ermakov_I_cart(s, m)
            ipolar = ermakov_I_polar(to_polar(s, form), m)
            worst = max(worst, abs(icart - ipolar) / max(1.0, abs(icart)))
            count += 1
    _report(
        8,
        worst <= 1e-12,
        f"Cartesian vs polar Ermakov invariant at {count} seeded states on "
        f"random definite forms: max relative gap {worst:.3e} <= 1e-12",
    )


def test_criterion_9_hamiltonian_consistency(protocol_runs):
    runs, _ = protocol_runs
    worst_forms = 0.0
    worst_hj = 0.0
    for name in ALL_FIXTURES:
        fx = catalog.get(name)
        m = fx.model
        for s in _seeded_states(fx, 100, t_span=(0.0, 2.0)):
            hv = hamiltonian(s, m)
            hc = hamiltonian_canonical(s, m)
            worst_forms = max(worst_forms, abs(hv - hc) / max(1.0, abs(hv)))
            if name != "tdho":  # rho == 1 fixtures: H = J pointwise
                worst_hj = max(
                    worst_hj, abs(hv - noether_J(s, m)) / max(1.0, abs(hv))
                )
    worst_drift = 0.0
    for name in ("iso_ho", "kepler", "hyperbolic", "gen_fg"):
        for tr in runs[name]:
            worst_drift = max(worst_drift, drift_report(tr)["H"]["max_drift"])
    _report(
        9,
        worst_forms <= 1e-12 and worst_hj <= 1e-12 and worst_drift <= 1e-8,
        f"Hamiltonian: velocity vs phase-space form gap {worst_forms:.3e} "
        f"<= 1e-12; H = J for rho == 1 gap {worst_hj:.3e} <= 1e-12; "
        f"H drift {worst_drift:.3e} <= 1e-8",
    )


def test_criterion_10_eom_keystone():
    h = 1e-6
    worst = 0.0
    count = 0
    for name in ALL_FIXTURES:
        fx = catalog.get(name)
        m = fx.model
        k = m.kappa
        for s in _seeded_states(fx, 200, t_span=(0.0, 2.0)):
            ax, ay = eom_rhs(s, m)
            vx = (m.potential_cart(s.x + h, s.y, s.t)
                  - m.potential_cart(s.x - h, s.y, s.t)) / (2 * h)
            vy = (m.potential_cart(s.x, s.y + h, s.t)
                  - m.potential_cart(s.x, s.y - h, s.t)) / (2 * h)
            fx_ = -(m.C * vx - m.B * vy) / k
            fy_ = -(-m.B * vx + m.A * vy) / k
            worst = max(
                worst,
                abs(ax - fx_) / max(1.0, abs(ax)),
                abs(ay - fy_) / max(1.0, abs(ay)),
            )
            count += 1
    _report(
        10,
        worst <= 1e-9 and count >= 1000,
        f"equations of motion vs finite-difference Lagrangian force at "
        f"{count} seeded states: max relative gap {worst:.3e} <= 1e-9",
    )
