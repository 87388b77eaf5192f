"""The conserved quantities: Ermakov invariant I, Noether invariant J, and
the Hamiltonian in both velocity and phase-space form.

    I = 1/2 (x ydot - y xdot)^2 + F(y/x) + G(x/y)
      = 1/2 R^4 psi^4 thetadot^2 + F(tan theta) + G(cot theta)

    J = 1/2 (rho Rdot - rho' R)^2 + U(R/rho) + kappa I (rho/R)^2

    H = 1/2 Rdot^2 + kappa I / R^2 - (rho''/2 rho) R^2 + U(R/rho)/rho^2
      = (C px^2 - 2 B px py + A py^2) / (2 kappa) + V          (canonical)

I and J are defined up to the additive constants fixed by the canonical
antiderivative lower limits; every drift or involution statement is
insensitive to that choice.
"""

import math

from .errors import AxisSingularity, ValidationError
from .geometry import psi_sq, to_polar


def ermakov_I_cart(s, m):
    """Ermakov invariant from a Cartesian state."""
    m.axis_args_check(s.x, s.y)
    lz = s.x * s.ydot - s.y * s.xdot
    value = 0.5 * lz * lz
    if not m.f_zero:
        value += m.F(s.y / s.x)
    if not m.g_zero:
        value += m.G(s.x / s.y)
    return value


def ermakov_I_polar(p, m):
    """Ermakov invariant from a polar state; equals the Cartesian form."""
    c = math.cos(p.theta)
    si = math.sin(p.theta)
    if not m.f_zero and c == 0.0:
        raise AxisSingularity("tan(theta) undefined with f nonzero")
    if not m.g_zero and si == 0.0:
        raise AxisSingularity("cot(theta) undefined with g nonzero")
    psi2 = psi_sq(p.theta, m.form)
    value = 0.5 * (p.R * p.R * psi2 * p.thetadot) ** 2
    if not m.f_zero:
        value += m.F(si / c)
    if not m.g_zero:
        value += m.G(c / si)
    return value


def _require_point_symmetric(m, what):
    if m.potential_kind != "point_symmetric":
        raise ValidationError(
            [f"{what} is defined only for point-symmetric models"]
        )


def noether_J(s, m):
    """Second invariant of the point-symmetric family."""
    _require_point_symmetric(m, "noether_J")
    p = to_polar(s, m.form)
    rho, rd, _ = m.rho_derivs(s.t)
    I = ermakov_I_cart(s, m)
    rad = rho * p.Rdot - rd * p.R
    return 0.5 * rad * rad + m.u_val(p.R / rho) + m.kappa * I * (rho / p.R) ** 2


def hamiltonian(s, m):
    """Velocity-form Hamiltonian of the point-symmetric family."""
    _require_point_symmetric(m, "hamiltonian")
    p = to_polar(s, m.form)
    rho, _, rdd = m.rho_derivs(s.t)
    I = ermakov_I_cart(s, m)
    return (
        0.5 * p.Rdot * p.Rdot
        + m.kappa * I / (p.R * p.R)
        - 0.5 * rdd / rho * p.R * p.R
        + m.u_val(p.R / rho) / (rho * rho)
    )


def hamiltonian_canonical(s, m):
    """Phase-space form: kinetic energy in momenta plus the potential."""
    px, py = m.momenta(s)
    kin = (m.C * px * px - 2.0 * m.B * px * py + m.A * py * py) / (2.0 * m.kappa)
    return kin + m.potential_cart(s.x, s.y, s.t)
