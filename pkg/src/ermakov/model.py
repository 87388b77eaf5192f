"""Validated Ermakov models and the quantities they induce.

A model is a quadratic form (A, B, C) with kappa = AC - B^2 != 0, the pair
of coupling functions f(lambda), g(lambda) with canonical antiderivative
lower limits, and a potential: either a generic vbar(R, t) or the
point-symmetric family built from a scale rho(t) > 0 and a profile U(s),

    vbar(R, t) = -(rho''/2 rho) R^2 + U(R/rho) / rho^2.

The frequency function is assembled as

    omega^2 = (1/R) d(vbar)/dR + sigma(theta) / R^4,

with sigma carrying the f, g contributions, and the full potential is

    V = vbar(R, t) + kappa/R^2 * (F(y/x) + G(x/y)),

where F, G are the antiderivatives of f, g from the canonical lower
limits.  All queries are pure; the model is immutable after validation.
"""

import math
from dataclasses import dataclass

from .errors import (
    AxisSingularity,
    DegenerateDirection,
    EvalDomainError,
    NonPositiveRho,
    ParseError,
    ValidationError,
)
from .exprdsl import (
    Antiderivative,
    compile_expr,
    diff_expr,
    free_vars,
    is_zero,
    parse_expr,
    pretty,
)
from .geometry import QuadraticForm

# sigma() is singular on the axes unless both couplings vanish
AXIS_SIN_COS_MIN = 1e-12


@dataclass(frozen=True)
class InverseSquareCoulomb:
    """U(s) = a/s^2 - b/s."""

    a: float
    b: float


@dataclass(frozen=True)
class InverseSquareHarmonic:
    """U(s) = a/s^2 + c s^2 / 2."""

    a: float
    c: float


@dataclass(frozen=True)
class UExpr:
    """U(s) given as expression text in the single variable s."""

    text: str


@dataclass(frozen=True)
class ModelSpec:
    form: object
    f: str = "0"
    g: str = "0"
    lambda0_f: float = 1.0
    lambda0_g: float = 1.0
    vbar: str | None = None
    rho: str | None = None
    U: object | None = None


def _parse_field(problems, text, allowed, label):
    try:
        return parse_expr(text, allowed)
    except ParseError as exc:
        problems.append(f"{label}: {exc}")
        return None


class ErmakovModel:
    """Immutable validated model; build through validate_model()."""

    def __init__(self, form, f_expr, g_expr, lambda0_f, lambda0_g, potential_kind,
                 vbar_expr=None, rho_expr=None, u_spec=None):
        self.form = form
        self.A = form.A
        self.B = form.B
        self.C = form.C
        self.kappa = form.kappa
        self.f_expr = f_expr
        self.g_expr = g_expr
        self.f_zero = is_zero(f_expr)
        self.g_zero = is_zero(g_expr)
        self.lambda0_f = float(lambda0_f)
        self.lambda0_g = float(lambda0_g)
        self._f_prog = None if self.f_zero else compile_expr(f_expr, ("lambda",))
        self._g_prog = None if self.g_zero else compile_expr(g_expr, ("lambda",))
        self.F = None if self.f_zero else Antiderivative(f_expr, "lambda", lambda0_f)
        self.G = None if self.g_zero else Antiderivative(g_expr, "lambda", lambda0_g)
        self.potential_kind = potential_kind
        self.vbar_expr = vbar_expr
        self.rho_expr = rho_expr
        self.u_spec = u_spec
        if potential_kind == "generic":
            self.vbar_zero = is_zero(vbar_expr)
            self._vbar_prog = compile_expr(vbar_expr, ("R", "t"))
            self._dvbar_dR_prog = compile_expr(diff_expr(vbar_expr, "R"), ("R", "t"))
            self._dvbar_dt_prog = compile_expr(diff_expr(vbar_expr, "t"), ("R", "t"))
            self._rho_const = None
        else:
            self.rho_d_expr = diff_expr(rho_expr, "t")
            self.rho_dd_expr = diff_expr(self.rho_d_expr, "t")
            self.rho_ddd_expr = diff_expr(self.rho_dd_expr, "t")
            if free_vars(rho_expr):
                self._rho_const = None
                self._rho_prog = compile_expr(rho_expr, ("t",))
                self._rho_d_prog = compile_expr(self.rho_d_expr, ("t",))
                self._rho_dd_prog = compile_expr(self.rho_dd_expr, ("t",))
                self._rho_ddd_prog = compile_expr(self.rho_ddd_expr, ("t",))
            else:
                rho0 = compile_expr(rho_expr, ())()
                if rho0 <= 0.0:
                    raise ValidationError([f"rho must be positive, got {rho0}"])
                self._rho_const = rho0
            self._init_u(u_spec)

    def _init_u(self, u_spec):
        if isinstance(u_spec, InverseSquareCoulomb):
            a, b = u_spec.a, u_spec.b

            def u_val(s):
                if s == 0.0:
                    raise EvalDomainError("division by zero", "a/s^2 - b/s")
                return a / (s * s) - b / s

            def u_prime(s):
                if s == 0.0:
                    raise EvalDomainError("division by zero", "-2a/s^3 + b/s^2")
                return -2.0 * a / (s * s * s) + b / (s * s)

            def u_val_many(s):
                return a / (s * s) - b / s

            def u_prime_many(s):
                return -2.0 * a / (s * s * s) + b / (s * s)

        elif isinstance(u_spec, InverseSquareHarmonic):
            a, c = u_spec.a, u_spec.c

            def u_val(s):
                if s == 0.0 and a != 0.0:
                    raise EvalDomainError("division by zero", "a/s^2 + c*s^2/2")
                core = c * s * s / 2.0
                return core if a == 0.0 else a / (s * s) + core

            def u_prime(s):
                if s == 0.0 and a != 0.0:
                    raise EvalDomainError("division by zero", "-2a/s^3 + c*s")
                core = c * s
                return core if a == 0.0 else -2.0 * a / (s * s * s) + core

            def u_val_many(s):
                return c * s * s / 2.0 + (0.0 if a == 0.0 else a / (s * s))

            def u_prime_many(s):
                return c * s + (0.0 if a == 0.0 else -2.0 * a / (s * s * s))

        else:
            self.u_expr = u_spec
            prog = compile_expr(u_spec, ("s",))
            dprog = compile_expr(diff_expr(u_spec, "s"), ("s",))
            u_val = prog.__call__
            u_prime = dprog.__call__
            u_val_many = prog.eval_many
            u_prime_many = dprog.eval_many
        self.u_val = u_val
        self.u_prime = u_prime
        self.u_val_many = u_val_many
        self.u_prime_many = u_prime_many

    # -- scale function ----------------------------------------------------

    def rho_val(self, t):
        if self._rho_const is not None:
            return self._rho_const
        rho = self._rho_prog(t)
        if rho <= 0.0:
            raise NonPositiveRho(f"rho({t}) = {rho} is not positive")
        return rho

    def rho_derivs(self, t):
        """(rho, rho', rho'') with the positivity check applied."""
        if self._rho_const is not None:
            return self._rho_const, 0.0, 0.0
        return self.rho_val(t), self._rho_d_prog(t), self._rho_dd_prog(t)

    def rho_third(self, t):
        if self._rho_const is not None:
            return 0.0
        return self._rho_ddd_prog(t)

    # -- coupling functions and their antiderivatives ----------------------

    def f_at(self, lam):
        return 0.0 if self.f_zero else self._f_prog(lam)

    def g_at(self, lam):
        return 0.0 if self.g_zero else self._g_prog(lam)

    def F_at(self, lam):
        return 0.0 if self.f_zero else self.F(lam)

    def G_at(self, lam):
        return 0.0 if self.g_zero else self.G(lam)

    def axis_args_check(self, x, y):
        """F takes y/x and G takes x/y; reject the exact singular arguments."""
        if not self.f_zero and x == 0.0:
            raise AxisSingularity("y/x undefined at x = 0 with f nonzero")
        if not self.g_zero and y == 0.0:
            raise AxisSingularity("x/y undefined at y = 0 with g nonzero")

    # -- potential pieces ---------------------------------------------------

    def vbar(self, R, t):
        if self.potential_kind == "generic":
            return self._vbar_prog(R, t)
        rho, _, rdd = self.rho_derivs(t)
        s = R / rho
        return -0.5 * rdd / rho * R * R + self.u_val(s) / (rho * rho)

    def dvbar_dR(self, R, t):
        if self.potential_kind == "generic":
            return self._dvbar_dR_prog(R, t)
        rho, _, rdd = self.rho_derivs(t)
        return -rdd / rho * R + self.u_prime(R / rho) / (rho ** 3)

    def dvbar_dt(self, R, t):
        """Explicit time partial of vbar at fixed R."""
        if self.potential_kind == "generic":
            return self._dvbar_dt_prog(R, t)
        rho, rd, rdd = self.rho_derivs(t)
        rddd = self.rho_third(t)
        s = R / rho
        out = -0.5 * R * R * (rddd * rho - rdd * rd) / (rho * rho)
        out -= self.u_prime(s) * R * rd / rho ** 4
        out -= 2.0 * rd * self.u_val(s) / rho ** 3
        return out

    # -- assembled quantities ------------------------------------------------

    def sigma(self, theta):
        """Angular source of the frequency function; 0 when f = g = 0."""
        if self.f_zero and self.g_zero:
            return 0.0
        c = math.cos(theta)
        s = math.sin(theta)
        if abs(s * c) < AXIS_SIN_COS_MIN:
            raise AxisSingularity(
                f"sigma undefined at theta = {theta} with nonzero coupling"
            )
        d = self.A * c * c + 2.0 * self.B * s * c + self.C * s * s
        tan = s / c
        cot = c / s
        total = 0.0
        if not self.f_zero:
            total += (self.A * c + self.B * s) * d * self.f_at(tan) / (s * c * c)
            total -= 2.0 * self.kappa * self.F(tan)
        if not self.g_zero:
            total += (self.B * c + self.C * s) * d * self.g_at(cot) / (s * s * c)
            total -= 2.0 * self.kappa * self.G(cot)
        return total

    def omega_sq(self, R, theta, t):
        if R <= 0.0:
            raise DegenerateDirection(f"omega^2 requires R > 0, got {R}")
        return self.dvbar_dR(R, t) / R + self.sigma(theta) / R ** 4

    def potential_cart(self, x, y, t):
        R2 = self.A * x * x + 2.0 * self.B * x * y + self.C * y * y
        if R2 <= 0.0:
            raise DegenerateDirection(
                f"R^2 = {R2} not positive at ({x}, {y})"
            )
        self.axis_args_check(x, y)
        coupling = 0.0
        if not self.f_zero:
            coupling += self.F(y / x)
        if not self.g_zero:
            coupling += self.G(x / y)
        return self.vbar(math.sqrt(R2), t) + self.kappa * coupling / R2

    def grad_V(self, x, y, t):
        """Analytic (dV/dx, dV/dy); exact chain rule through F, G."""
        R2 = self.A * x * x + 2.0 * self.B * x * y + self.C * y * y
        if R2 <= 0.0:
            raise DegenerateDirection(f"R^2 = {R2} not positive at ({x}, {y})")
        self.axis_args_check(x, y)
        R = math.sqrt(R2)
        Rx = (self.A * x + self.B * y) / R
        Ry = (self.B * x + self.C * y) / R
        S = 0.0
        cx = 0.0
        cy = 0.0
        if not self.f_zero:
            w = y / x
            fw = self._f_prog(w)
            S += self.F(w)
            cx += fw * (-y / (x * x))
            cy += fw / x
        if not self.g_zero:
            w = x / y
            gw = self._g_prog(w)
            S += self.G(w)
            cx += gw / y
            cy += gw * (-x / (y * y))
        radial = self.dvbar_dR(R, t) - 2.0 * self.kappa * S / R ** 3
        k_over_R2 = self.kappa / R2
        return radial * Rx + k_over_R2 * cx, radial * Ry + k_over_R2 * cy

    def dV_dt(self, x, y, t):
        """Explicit time partial of V; the coupling terms carry no t."""
        R2 = self.A * x * x + 2.0 * self.B * x * y + self.C * y * y
        if R2 <= 0.0:
            raise DegenerateDirection(f"R^2 = {R2} not positive at ({x}, {y})")
        return self.dvbar_dt(math.sqrt(R2), t)

    # -- Lagrangian pieces ----------------------------------------------------

    def kinetic(self, s):
        return 0.5 * (
            self.A * s.xdot * s.xdot
            + 2.0 * self.B * s.xdot * s.ydot
            + self.C * s.ydot * s.ydot
        )

    def momenta(self, s):
        return (
            self.A * s.xdot + self.B * s.ydot,
            self.B * s.xdot + self.C * s.ydot,
        )

    def lagrangian(self, s):
        return self.kinetic(s) - self.potential_cart(s.x, s.y, s.t)

    def __repr__(self):
        return (
            f"ErmakovModel(A={self.A}, B={self.B}, C={self.C}, "
            f"f={pretty(self.f_expr)}, g={pretty(self.g_expr)}, "
            f"potential={self.potential_kind})"
        )


def validate_model(spec=None, **kwargs):
    """Build an ErmakovModel, collecting every violation before raising."""
    if spec is None:
        spec = ModelSpec(**kwargs)
    problems = []

    form = None
    try:
        if isinstance(spec.form, QuadraticForm):
            form = spec.form
        else:
            form = QuadraticForm(*map(float, spec.form))
    except ValidationError as exc:
        problems.extend(exc.problems)
    except (TypeError, ValueError) as exc:
        problems.append(f"form: {exc}")

    f_expr = _parse_field(problems, spec.f, {"lambda"}, "f")
    g_expr = _parse_field(problems, spec.g, {"lambda"}, "g")
    for label, v in (("lambda0_f", spec.lambda0_f), ("lambda0_g", spec.lambda0_g)):
        if not math.isfinite(v):
            problems.append(f"{label} must be finite, got {v!r}")

    has_generic = spec.vbar is not None
    has_ps = spec.rho is not None or spec.U is not None
    vbar_expr = rho_expr = u_spec = None
    kind = None
    if has_generic and has_ps:
        problems.append("potential: give either vbar or (rho, U), not both")
    elif has_generic:
        kind = "generic"
        vbar_expr = _parse_field(problems, spec.vbar, {"R", "t"}, "vbar")
    elif has_ps:
        kind = "point_symmetric"
        if spec.rho is None or spec.U is None:
            problems.append("potential: point-symmetric form needs both rho and U")
        else:
            rho_expr = _parse_field(problems, spec.rho, {"t"}, "rho")
            u_spec = spec.U
            if isinstance(u_spec, UExpr):
                u_spec = _parse_field(problems, u_spec.text, {"s"}, "U")
            elif isinstance(u_spec, str):
                u_spec = _parse_field(problems, u_spec, {"s"}, "U")
            elif isinstance(u_spec, (InverseSquareCoulomb, InverseSquareHarmonic)):
                if isinstance(u_spec, InverseSquareCoulomb):
                    fields = (("a", u_spec.a), ("b", u_spec.b))
                else:
                    fields = (("a", u_spec.a), ("c", u_spec.c))
                for name, v in fields:
                    if not math.isfinite(v):
                        problems.append(f"U.{name} must be finite, got {v!r}")
            else:
                problems.append(f"U: unsupported variant {u_spec!r}")
    else:
        problems.append("potential: one of vbar or (rho, U) is required")

    if problems:
        raise ValidationError(problems)
    return ErmakovModel(
        form,
        f_expr,
        g_expr,
        spec.lambda0_f,
        spec.lambda0_g,
        kind,
        vbar_expr=vbar_expr,
        rho_expr=rho_expr,
        u_spec=u_spec,
    )


def sigma(theta, model):
    return model.sigma(theta)


def omega_sq(R, theta, t, model):
    return model.omega_sq(R, theta, t)


def potential(x, y, t, model):
    return model.potential_cart(x, y, t)
