"""Linearization of the point-symmetric family.

With phi = alpha(t)/R and the polar angle theta as independent variable,
the dynamics collapse to the linear equation

    h^2 phi'' + h (dh/dtheta) phi' + 2 (kappa I + a) phi = b,

where h(theta; I) = sqrt(2) * psi^-2 * sqrt(I - F(tan) - G(cot)) is the
angular speed factor R^2 thetadot taken from the Ermakov invariant.  Only
two profiles U are compatible:

    U1: U(s) = a/s^2 - b/s      with alpha = rho
    U2: U(s) = a/s^2 + c s^2/2  with alpha any solution of
        alpha'' + (c/rho^3 - rho'') alpha / rho = 0   (then b = 0)

The radicand in h uses I - F - G, the combination forced by the polar form
of the Ermakov invariant (so that h^2 reproduces (R^2 thetadot)^2 exactly).
Reconstruction: R = alpha/phi and dt/dtheta = alpha(t)^2 / (phi^2 h), a
scalar ODE that degenerates to a quadrature when alpha is constant.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .dynamics import Trajectory, eom_rhs
from .errors import (
    AlphaVanishes,
    AngularTurning,
    EvalDomainError,
    ValidationError,
)
from .exprdsl import compile_expr
from .geometry import PolarState, from_polar, to_polar
from .invariants import ermakov_I_cart, hamiltonian, noether_J
from .model import InverseSquareCoulomb, InverseSquareHarmonic
from .odeutil import integrate_dense

FIT_SAMPLES = 32
FIT_RANGE = (0.2, 5.0)
FIT_TOL = 1e-9


@dataclass(frozen=True)
class LinearisableClass:
    tag: str  # "U1" | "U2" | "none"
    a: float = 0.0
    b: float = 0.0  # U1 only
    c: float = 0.0  # U2 only
    residual: float = 0.0

    @property
    def linearisable(self):
        return self.tag != "none"


NOT_LINEARISABLE = LinearisableClass("none", residual=math.inf)


def _radicand(theta, I, m):
    c = math.cos(theta)
    s = math.sin(theta)
    rad = I
    if not m.f_zero:
        rad -= m.F(s / c)
    if not m.g_zero:
        rad -= m.G(c / s)
    return rad


def h_of_theta(theta, I, m):
    """Angular factor h = R^2 thetadot as a function of theta alone."""
    rad = _radicand(theta, I, m)
    if rad <= 0.0:
        raise AngularTurning(
            f"angular radicand {rad} not positive at theta = {theta}", theta=theta
        )
    c = math.cos(theta)
    s = math.sin(theta)
    d = m.A * c * c + 2.0 * m.B * s * c + m.C * s * s
    return math.sqrt(2.0 * rad) * d


def dh_dtheta(theta, I, m):
    """Exact theta-derivative of h; F' = f and G' = g feed the chain rule."""
    rad = _radicand(theta, I, m)
    if rad <= 0.0:
        raise AngularTurning(
            f"angular radicand {rad} not positive at theta = {theta}", theta=theta
        )
    c = math.cos(theta)
    s = math.sin(theta)
    d = m.A * c * c + 2.0 * m.B * s * c + m.C * s * s
    dd = (m.C - m.A) * math.sin(2.0 * theta) + 2.0 * m.B * math.cos(2.0 * theta)
    drad = 0.0
    if not m.f_zero:
        drad -= m.f_at(s / c) / (c * c)
    if not m.g_zero:
        drad += m.g_at(c / s) / (s * s)
    root = math.sqrt(2.0 * rad)
    return dd * root + d * drad / root


def classify_linearisable(m):
    """Decide whether U belongs to the U1 or U2 family."""
    if m.potential_kind != "point_symmetric":
        return NOT_LINEARISABLE
    u = m.u_spec
    if isinstance(u, InverseSquareCoulomb):
        return LinearisableClass("U1", a=u.a, b=u.b)
    if isinstance(u, InverseSquareHarmonic):
        return LinearisableClass("U2", a=u.a, c=u.c)
    s = np.geomspace(FIT_RANGE[0], FIT_RANGE[1], FIT_SAMPLES)
    try:
        uv = np.asarray(m.u_val_many(s), dtype=float)
    except EvalDomainError:
        return NOT_LINEARISABLE
    if np.ndim(uv) == 0:
        uv = np.full_like(s, float(uv))
    scale = max(1.0, float(np.max(np.abs(uv))))
    basis_u1 = np.column_stack([1.0 / s ** 2, -1.0 / s])
    basis_u2 = np.column_stack([1.0 / s ** 2, s ** 2 / 2.0])
    for tag, basis in (("U1", basis_u1), ("U2", basis_u2)):
        coef, *_ = np.linalg.lstsq(basis, uv, rcond=None)
        resid = float(np.max(np.abs(basis @ coef - uv)))
        if resid <= FIT_TOL * scale:
            if tag == "U1":
                return LinearisableClass("U1", a=coef[0], b=coef[1], residual=resid)
            return LinearisableClass("U2", a=coef[0], c=coef[1], residual=resid)
    return NOT_LINEARISABLE


class AlphaFunction:
    """alpha(t) with first and second derivatives on a window."""

    def __init__(self, value, d1, d2, window):
        self.value = value
        self.d1 = d1
        self.d2 = d2
        self.window = window

    def __call__(self, t):
        return self.value(t)


def alpha_solve(m, cls, window):
    """Pick the linearizing alpha: rho for U1, a particular solution for U2."""
    if not cls.linearisable:
        raise ValidationError(["alpha_solve requires a linearisable class"])
    t0, t1 = float(window[0]), float(window[1])
    if cls.tag == "U1":
        if m._rho_const is not None:
            r = m._rho_const
            return AlphaFunction(lambda t: r, lambda t: 0.0, lambda t: 0.0, (t0, t1))
        rho_p = compile_expr(m.rho_expr, ("t",))
        rho_d = compile_expr(m.rho_d_expr, ("t",))
        rho_dd = compile_expr(m.rho_dd_expr, ("t",))
        return AlphaFunction(rho_p.__call__, rho_d.__call__, rho_dd.__call__, (t0, t1))

    c = cls.c

    def accel(t, alpha):
        rho, _, rdd = m.rho_derivs(t)
        return -(c / rho ** 3 - rdd) * alpha / rho

    def rhs(t, y):
        return np.array([y[1], accel(t, y[0])])

    crossings = []

    def hook(t_prev, y_prev, t, y):
        if y_prev[0] * y[0] <= 0.0 and y_prev[0] != y[0]:
            crossings.append((t_prev, t))

    # the linear ODE is regular through alpha = 0, so finish the window and
    # then report the first crossing at full accuracy
    sol = integrate_dense(rhs, (t0, t1), [1.0, 0.0], rtol=1e-12, atol=1e-12,
                          step_hook=hook)
    if crossings:
        lo, hi = crossings[0]
        z = brentq(lambda t: float(sol(t)[0]), lo, hi, xtol=1e-13)
        raise AlphaVanishes(
            f"alpha crosses zero at t = {z:.12g} inside the window", t=z
        )
    return AlphaFunction(
        lambda t: float(sol(t)[0]),
        lambda t: float(sol(t)[1]),
        lambda t: accel(t, float(sol(t)[0])),
        (t0, t1),
    )


def integrate_linear(m, I, cls, phi0, dphi0, theta_span, rtol=1e-12):
    """Solve the linear phi(theta) equation; returns a dense [phi, phi'] path."""
    if not cls.linearisable:
        raise ValidationError(["integrate_linear requires a linearisable class"])
    a = cls.a
    b = cls.b if cls.tag == "U1" else 0.0
    k2 = 2.0 * (m.kappa * I + a)

    def rhs(theta, y):
        h = h_of_theta(theta, I, m)
        hp = dh_dtheta(theta, I, m)
        return np.array(
            [y[1], (b - k2 * y[0] - h * hp * y[1]) / (h * h)]
        )

    return integrate_dense(rhs, theta_span, [phi0, dphi0], rtol=rtol, atol=rtol)


def reconstruct(phi_sol, alpha, m, I, theta0, t0, t_eval=None, n_samples=200):
    """Map a phi(theta) solution back to a Cartesian trajectory.

    Time recovery integrates dt/dtheta = alpha(t)^2 / (phi^2 h) from t0;
    theta must increase along the motion (thetadot > 0).
    """
    theta_end = float(phi_sol.t_end)
    if theta_end <= theta0:
        raise ValidationError(["reconstruct expects an increasing theta span"])

    def phi_at(theta):
        return float(phi_sol(theta)[0])

    def dphi_at(theta):
        return float(phi_sol(theta)[1])

    def t_rhs(theta, y):
        p = phi_at(theta)
        if p <= 0.0:
            raise AlphaVanishes(
                f"phi reached {p} at theta = {theta}; R diverges", t=theta
            )
        av = alpha(float(y[0]))
        return np.array([av * av / (p * p * h_of_theta(theta, I, m))])

    t_sol = integrate_dense(t_rhs, (theta0, theta_end), [t0], rtol=1e-12, atol=1e-12)

    def theta_of_t(t):
        return brentq(
            lambda th: float(t_sol(th)[0]) - t, theta0, theta_end, xtol=1e-13
        )

    if t_eval is None:
        thetas = np.linspace(theta0, theta_end, n_samples)
        ts = np.array([float(t_sol(th)[0]) for th in thetas])
    else:
        ts = np.asarray(t_eval, dtype=float)
        t_max = float(t_sol(theta_end)[0])
        if ts.max() > t_max + 1e-12:
            raise AngularTurning(
                f"phi table ends at theta = {theta_end} (t = {t_max}); "
                f"cannot reach t = {ts.max()}",
                theta=theta_end,
            )
        thetas = np.array([theta_of_t(t) for t in ts])

    rows = []
    Is, Js, Hs = [], [], []
    point_symmetric = m.potential_kind == "point_symmetric"
    for t, theta in zip(ts, thetas):
        p = phi_at(theta)
        if p <= 0.0:
            raise AlphaVanishes(f"phi reached {p} at theta = {theta}", t=theta)
        av = alpha(t)
        R = av / p
        h = h_of_theta(theta, I, m)
        thetadot = h / (R * R)
        Rdot = alpha.d1(t) / p - av * dphi_at(theta) * thetadot / (p * p)
        s = from_polar(PolarState(R, theta, Rdot, thetadot, t), m.form)
        rows.append((s.x, s.y, s.xdot, s.ydot))
        Is.append(ermakov_I_cart(s, m))
        if point_symmetric:
            Js.append(noether_J(s, m))
            Hs.append(hamiltonian(s, m))
    return Trajectory(
        ts,
        rows,
        Is,
        J=Js if point_symmetric else None,
        H=Hs if point_symmetric else None,
        method="linearize",
    )


def linear_form_residual(s, m, I, cls, alpha):
    """Residual of the linear phi-equation evaluated on a raw state.

    phi' and phi'' come from exact time derivatives along the flow
    (accelerations substituted), so a direct trajectory should satisfy the
    equation to integrator accuracy.
    """
    ax, ay = eom_rhs(s, m)
    p = to_polar(s, m.form)
    R, Rdot = p.R, p.Rdot
    r2 = s.x * s.x + s.y * s.y
    thetadot = p.thetadot
    if thetadot == 0.0:
        raise AngularTurning("thetadot = 0; theta is not a valid parameter")
    # second derivatives of R and theta along the flow
    qMq = (
        m.A * s.xdot * s.xdot
        + 2.0 * m.B * s.xdot * s.ydot
        + m.C * s.ydot * s.ydot
    )
    qMa = (
        m.A * s.x * ax + m.B * (s.x * ay + s.y * ax) + m.C * s.y * ay
    )
    Rddot = (qMq + qMa - Rdot * Rdot) / R
    thetaddot = (s.x * ay - s.y * ax) / r2 - 2.0 * (
        s.x * s.xdot + s.y * s.ydot
    ) * (s.x * s.ydot - s.y * s.xdot) / (r2 * r2)
    t = s.t
    av, ad, add = alpha(t), alpha.d1(t), alpha.d2(t)
    phi = av / R
    phidot = ad / R - av * Rdot / (R * R)
    phiddot = (
        add / R
        - 2.0 * ad * Rdot / (R * R)
        - av * Rddot / (R * R)
        + 2.0 * av * Rdot * Rdot / (R ** 3)
    )
    dphi = phidot / thetadot
    d2phi = (phiddot * thetadot - phidot * thetaddot) / thetadot ** 3
    h = h_of_theta(p.theta, I, m)
    hp = dh_dtheta(p.theta, I, m)
    a = cls.a
    b = cls.b if cls.tag == "U1" else 0.0
    return h * h * d2phi + h * hp * dphi + 2.0 * (m.kappa * I + a) * phi - b
