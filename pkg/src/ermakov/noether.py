"""Noether symmetry verification, the converse construction, and brackets.

Generator components tau, eta1, eta2 and the gauge Lambda are scalar fields
on (x, y, xdot, ydot, t) with analytic partial derivatives, so the symmetry
criterion

    tau dL/dt + eta . dL/dq + (etadot - taudot qdot) . dL/dqdot
        + taudot L - Lambdadot = residual

is evaluated exactly, with every total time derivative substituting the
accelerations from the equations of motion.  The converse construction
turns the Ermakov invariant into a (dynamical) generator

    eta_i = -g_ij dI/dqdot_j + tau qdot_i,   g = metric inverse,

whose induced gauge has the closed form Lambda = I - qdot . dI/dqdot + tau L.

Poisson brackets act on phase-space functions (x, y, px, py, t); velocity
form fields are converted through xdot = (C px - B py)/kappa,
ydot = (A py - B px)/kappa.
"""

from dataclasses import dataclass

from .dynamics import eom_rhs
from .errors import ValidationError
from .exprdsl import Num, Var, compile_expr, diff_expr
from .geometry import CartesianState, to_polar

STATE_VARS = ("x", "y", "xdot", "ydot", "t")


# ---------------------------------------------------------------------------
# scalar fields: value plus analytic partials wrt (x, y, xdot, ydot, t)


class ConstField:
    def __init__(self, c):
        self.c = float(c)

    def value(self, s, m):
        return self.c

    def partials(self, s, m):
        return (0.0, 0.0, 0.0, 0.0, 0.0)


class ExprField:
    """A field backed by an expression AST; partials by exact differentiation."""

    def __init__(self, expr):
        self.expr = expr
        self._prog = compile_expr(expr, STATE_VARS)
        self._dprogs = tuple(
            compile_expr(diff_expr(expr, v), STATE_VARS) for v in STATE_VARS
        )

    def value(self, s, m):
        return self._prog(s.x, s.y, s.xdot, s.ydot, s.t)

    def partials(self, s, m):
        args = (s.x, s.y, s.xdot, s.ydot, s.t)
        return tuple(p(*args) for p in self._dprogs)


class SumField:
    def __init__(self, fields):
        self.fields = list(fields)

    def value(self, s, m):
        return sum(f.value(s, m) for f in self.fields)

    def partials(self, s, m):
        acc = [0.0] * 5
        for f in self.fields:
            for i, p in enumerate(f.partials(s, m)):
                acc[i] += p
        return tuple(acc)


class ScaledField:
    def __init__(self, c, field):
        self.c = float(c)
        self.field = field

    def value(self, s, m):
        return self.c * self.field.value(s, m)

    def partials(self, s, m):
        return tuple(self.c * p for p in self.field.partials(s, m))


class ProductField:
    def __init__(self, fa, fb):
        self.fa = fa
        self.fb = fb

    def value(self, s, m):
        return self.fa.value(s, m) * self.fb.value(s, m)

    def partials(self, s, m):
        va = self.fa.value(s, m)
        vb = self.fb.value(s, m)
        pa = self.fa.partials(s, m)
        pb = self.fb.partials(s, m)
        return tuple(pa[i] * vb + va * pb[i] for i in range(5))


class LzHalfSquared:
    """Half the squared cross product, the kinetic part of I."""

    def value(self, s, m):
        lz = s.x * s.ydot - s.y * s.xdot
        return 0.5 * lz * lz

    def partials(self, s, m):
        lz = s.x * s.ydot - s.y * s.xdot
        return (lz * s.ydot, -lz * s.xdot, -lz * s.y, lz * s.x, 0.0)


class CouplingSum:
    """F(y/x) + G(x/y); partials go through the integrands f, g."""

    def value(self, s, m):
        m.axis_args_check(s.x, s.y)
        v = 0.0
        if not m.f_zero:
            v += m.F(s.y / s.x)
        if not m.g_zero:
            v += m.G(s.x / s.y)
        return v

    def partials(self, s, m):
        m.axis_args_check(s.x, s.y)
        dx = dy = 0.0
        if not m.f_zero:
            fw = m.f_at(s.y / s.x)
            dx += fw * (-s.y / (s.x * s.x))
            dy += fw / s.x
        if not m.g_zero:
            gw = m.g_at(s.x / s.y)
            dx += gw / s.y
            dy += gw * (-s.x / (s.y * s.y))
        return (dx, dy, 0.0, 0.0, 0.0)


class ErmakovIField(SumField):
    def __init__(self):
        super().__init__([LzHalfSquared(), CouplingSum()])


class LagrangianField:
    def value(self, s, m):
        return m.lagrangian(s)

    def partials(self, s, m):
        vx, vy = m.grad_V(s.x, s.y, s.t)
        px, py = m.momenta(s)
        return (-vx, -vy, px, py, -m.dV_dt(s.x, s.y, s.t))


class HamiltonianField:
    """T + V, the canonical energy function (any potential variant)."""

    def value(self, s, m):
        return m.kinetic(s) + m.potential_cart(s.x, s.y, s.t)

    def partials(self, s, m):
        vx, vy = m.grad_V(s.x, s.y, s.t)
        px, py = m.momenta(s)
        return (vx, vy, px, py, m.dV_dt(s.x, s.y, s.t))


class NoetherJField:
    """J = 1/2 (rho Rdot - rho' R)^2 + U(R/rho) + kappa I (rho/R)^2."""

    def __init__(self):
        self._ifield = ErmakovIField()

    def _geometry(self, s, m):
        p = to_polar(s, m.form)
        R = p.R
        Rx = (m.A * s.x + m.B * s.y) / R
        Ry = (m.B * s.x + m.C * s.y) / R
        Rdx = (m.A * s.xdot + m.B * s.ydot) / R - p.Rdot * Rx / R
        Rdy = (m.B * s.xdot + m.C * s.ydot) / R - p.Rdot * Ry / R
        return p, Rx, Ry, Rdx, Rdy

    def value(self, s, m):
        p = to_polar(s, m.form)
        rho, rd, _ = m.rho_derivs(s.t)
        I = self._ifield.value(s, m)
        rad = rho * p.Rdot - rd * p.R
        return 0.5 * rad * rad + m.u_val(p.R / rho) + m.kappa * I * (rho / p.R) ** 2

    def partials(self, s, m):
        p, Rx, Ry, Rdx, Rdy = self._geometry(s, m)
        rho, rd, rdd = m.rho_derivs(s.t)
        R = p.R
        I = self._ifield.value(s, m)
        Ix, Iy, Ivx, Ivy, _ = self._ifield.partials(s, m)
        P = rho * p.Rdot - rd * R
        up = m.u_prime(R / rho)
        co = m.kappa * rho * rho
        dx = P * (rho * Rdx - rd * Rx) + up * Rx / rho + co * (
            Ix / (R * R) - 2.0 * I * Rx / R ** 3
        )
        dy = P * (rho * Rdy - rd * Ry) + up * Ry / rho + co * (
            Iy / (R * R) - 2.0 * I * Ry / R ** 3
        )
        dvx = P * rho * Rx + co * Ivx / (R * R)
        dvy = P * rho * Ry + co * Ivy / (R * R)
        dt = (
            P * (rd * p.Rdot - rdd * R)
            - up * R * rd / (rho * rho)
            + 2.0 * m.kappa * I * rho * rd / (R * R)
        )
        return (dx, dy, dvx, dvy, dt)


# ---------------------------------------------------------------------------
# generators and the symmetry criterion


@dataclass
class SymmetryGenerator:
    tau: object
    eta1: object
    eta2: object
    gauge: object
    kind: str  # "point" | "dynamical"


def _r2_expr(m):
    x, y = Var("x"), Var("y")
    return Num(m.A) * x * x + Num(2.0 * m.B) * x * y + Num(m.C) * y * y


def point_symmetry(m):
    """The scaling point symmetry of the point-symmetric family with its gauge
    Lambda = (rho rho'' + rho'^2) R^2 / 2."""
    if m.potential_kind != "point_symmetric":
        raise ValidationError(["point symmetry requires a point-symmetric model"])
    rho = m.rho_expr
    rho_d = m.rho_d_expr
    rho_dd = m.rho_dd_expr
    tau = rho * rho
    eta1 = rho * rho_d * Var("x")
    eta2 = rho * rho_d * Var("y")
    gauge = Num(0.5) * (rho * rho_dd + rho_d * rho_d) * _r2_expr(m)
    return SymmetryGenerator(
        ExprField(tau), ExprField(eta1), ExprField(eta2), ExprField(gauge), "point"
    )


def corrupted_point_symmetry(m, amplitude=0.01):
    """Negative control: same generator with a deliberately wrong gauge."""
    gen = point_symmetry(m)
    wrong = SumField([gen.gauge, ExprField(Num(amplitude) * Var("t") * _r2_expr(m))])
    return SymmetryGenerator(gen.tau, gen.eta1, gen.eta2, wrong, "point")


def converse_generator(m, tau=None, invariant=None):
    """Generator produced by a known invariant through the metric inverse.

    eta_i = -g_ij dI/dqdot_j + tau qdot_i with g = [[C, -B], [-B, A]]/kappa,
    and the induced gauge Lambda = I - qdot . dI/dqdot + tau L (which makes
    the Noether invariant of the generator equal I itself).
    """
    if tau is None:
        tau = ConstField(0.0)
    if invariant is None:
        invariant = ErmakovIField()
    if not isinstance(invariant, ErmakovIField):
        raise ValidationError(
            ["converse construction is implemented for the Ermakov invariant"]
        )
    k = m.kappa
    x, y, vx, vy = Var("x"), Var("y"), Var("xdot"), Var("ydot")
    lz = x * vy - y * vx
    eta1 = SumField(
        [
            ExprField(lz * (Num(m.C) * y + Num(m.B) * x) / Num(k)),
            ProductField(tau, ExprField(vx)),
        ]
    )
    eta2 = SumField(
        [
            ExprField(Num(-1.0) * lz * (Num(m.B) * y + Num(m.A) * x) / Num(k)),
            ProductField(tau, ExprField(vy)),
        ]
    )
    # I - qdot . dI/dqdot = F + G - Lz^2 / 2
    gauge = SumField(
        [
            CouplingSum(),
            ScaledField(-1.0, LzHalfSquared()),
            ProductField(tau, LagrangianField()),
        ]
    )
    return SymmetryGenerator(tau, eta1, eta2, gauge, "dynamical")


def total_derivative(field, s, m, ax, ay):
    """d/dt of a field along the flow, accelerations substituted."""
    px, py, pvx, pvy, pt = field.partials(s, m)
    return pt + px * s.xdot + py * s.ydot + pvx * ax + pvy * ay


def noether_residual(gen, s, m, eps_axis=1e-8):
    """Residual of the symmetry criterion at a state; 0 for true symmetries."""
    ax, ay = eom_rhs(s, m, eps_axis)
    px, py = m.momenta(s)
    vx, vy = m.grad_V(s.x, s.y, s.t)
    dVdt = m.dV_dt(s.x, s.y, s.t)
    L = m.lagrangian(s)
    tau_v = gen.tau.value(s, m)
    eta1_v = gen.eta1.value(s, m)
    eta2_v = gen.eta2.value(s, m)
    tau_dot = total_derivative(gen.tau, s, m, ax, ay)
    eta1_dot = total_derivative(gen.eta1, s, m, ax, ay)
    eta2_dot = total_derivative(gen.eta2, s, m, ax, ay)
    gauge_dot = total_derivative(gen.gauge, s, m, ax, ay)
    return (
        tau_v * (-dVdt)
        + eta1_v * (-vx)
        + eta2_v * (-vy)
        + (eta1_dot - tau_dot * s.xdot) * px
        + (eta2_dot - tau_dot * s.ydot) * py
        + tau_dot * L
        - gauge_dot
    )


def generator_polar_components(gen, s, m):
    """(delta R, delta theta) of the generator's spatial part at a state."""
    eta1 = gen.eta1.value(s, m)
    eta2 = gen.eta2.value(s, m)
    p = to_polar(s, m.form)
    Rx = (m.A * s.x + m.B * s.y) / p.R
    Ry = (m.B * s.x + m.C * s.y) / p.R
    r2 = s.x * s.x + s.y * s.y
    dR = Rx * eta1 + Ry * eta2
    dtheta = (-s.y * eta1 + s.x * eta2) / r2
    return dR, dtheta


def generator_noether_invariant(gen, s, m):
    """tau (qdot . p - L) - eta . p + Lambda, the invariant the generator owes."""
    px, py = m.momenta(s)
    L = m.lagrangian(s)
    tau_v = gen.tau.value(s, m)
    return (
        tau_v * (s.xdot * px + s.ydot * py - L)
        - gen.eta1.value(s, m) * px
        - gen.eta2.value(s, m) * py
        + gen.gauge.value(s, m)
    )


# ---------------------------------------------------------------------------
# phase space functions and Poisson brackets


class PhaseFunction:
    """A named function on (x, y, px, py, t) with analytic gradients."""

    def __init__(self, name, field, m):
        self.name = name
        self.field = field
        self.m = m

    def _state(self, point):
        x, y, px, py = point[:4]
        t = point[4] if len(point) > 4 else 0.0
        k = self.m.kappa
        xdot = (self.m.C * px - self.m.B * py) / k
        ydot = (self.m.A * py - self.m.B * px) / k
        return CartesianState(x, y, xdot, ydot, t)

    def value(self, point):
        return self.field.value(self._state(point), self.m)

    def gradient(self, point):
        """(d/dx, d/dy, d/dpx, d/dpy) at a phase point."""
        s = self._state(point)
        fx, fy, fvx, fvy, _ = self.field.partials(s, self.m)
        k = self.m.kappa
        fpx = (self.m.C * fvx - self.m.B * fvy) / k
        fpy = (self.m.A * fvy - self.m.B * fvx) / k
        return (fx, fy, fpx, fpy)


def phase_catalog(m):
    """The named phase functions used by the involution checks."""
    out = {
        "I": PhaseFunction("I", ErmakovIField(), m),
        "H": PhaseFunction("H", HamiltonianField(), m),
        "x": PhaseFunction("x", ExprField(Var("x")), m),
        "y": PhaseFunction("y", ExprField(Var("y")), m),
        "px": PhaseFunction(
            "px", ExprField(Num(m.A) * Var("xdot") + Num(m.B) * Var("ydot")), m
        ),
        "py": PhaseFunction(
            "py", ExprField(Num(m.B) * Var("xdot") + Num(m.C) * Var("ydot")), m
        ),
    }
    if m.potential_kind == "point_symmetric":
        out["J"] = PhaseFunction("J", NoetherJField(), m)
    return out


def poisson_bracket(fa, fb, point, m=None):
    """{Fa, Fb} = dFa/dq . dFb/dp - dFa/dp . dFb/dq at a phase point."""
    gax, gay, gapx, gapy = fa.gradient(point)
    gbx, gby, gbpx, gbpy = fb.gradient(point)
    return gax * gbpx + gay * gbpy - gapx * gbx - gapy * gby
