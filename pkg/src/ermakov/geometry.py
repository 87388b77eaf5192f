"""Quadratic-form radius, polar angle, and state transforms.

R^2 = A x^2 + 2 B x y + C y^2 defines the kinetic-metric radius; theta is
the ordinary polar angle atan2(y, x).  The direction weight psi(theta)
relates the Euclidean radius r to R via r = R psi(theta), with

    psi^2(theta) = 1 / (A cos^2 + 2 B sin cos + C sin^2).

Indefinite forms (kappa < 0) are allowed; operations raise
DegenerateDirection outside the cone where R^2 > 0.
"""

import math
from dataclasses import dataclass

from .errors import DegenerateDirection, ValidationError

KAPPA_MIN = 1e-12
PSI_DENOM_MIN = 1e-14


@dataclass(frozen=True)
class QuadraticForm:
    A: float
    B: float
    C: float

    def __post_init__(self):
        problems = []
        for name in ("A", "B", "C"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                problems.append(f"form coefficient {name} must be finite, got {v!r}")
        if not problems:
            k = self.A * self.C - self.B * self.B
            if abs(k) < KAPPA_MIN:
                problems.append(
                    f"quadratic form must satisfy kappa = A*C - B^2 != 0 "
                    f"(|kappa| >= {KAPPA_MIN}), got kappa = {k}"
                )
        if problems:
            raise ValidationError(problems)

    @property
    def kappa(self):
        return self.A * self.C - self.B * self.B


@dataclass(frozen=True)
class CartesianState:
    x: float
    y: float
    xdot: float
    ydot: float
    t: float = 0.0


@dataclass(frozen=True)
class PolarState:
    R: float
    theta: float
    Rdot: float
    thetadot: float
    t: float = 0.0


def kappa(form):
    """AC - B^2, the determinant of the kinetic metric."""
    return form.A * form.C - form.B * form.B


def _denom(theta, form):
    c = math.cos(theta)
    s = math.sin(theta)
    return form.A * c * c + 2.0 * form.B * s * c + form.C * s * s


def psi_sq(theta, form):
    """Direction weight psi^2(theta); raises off the definite cone."""
    d = _denom(theta, form)
    if abs(d) < PSI_DENOM_MIN:
        raise DegenerateDirection(
            f"quadratic form degenerate along theta = {theta}"
        )
    return 1.0 / d


def dpsi_dtheta(theta, form):
    """d(psi)/d(theta) for the chain rule in velocity transforms."""
    d = _denom(theta, form)
    if d <= 0.0:
        raise DegenerateDirection(
            f"quadratic form not positive along theta = {theta}"
        )
    dd = (form.C - form.A) * math.sin(2.0 * theta) + 2.0 * form.B * math.cos(
        2.0 * theta
    )
    return -0.5 * d ** -1.5 * dd


def to_polar(s, form):
    """Cartesian state -> (R, theta, Rdot, thetadot)."""
    r2 = s.x * s.x + s.y * s.y
    if r2 == 0.0:
        raise DegenerateDirection("polar coordinates undefined at the origin")
    R2 = form.A * s.x * s.x + 2.0 * form.B * s.x * s.y + form.C * s.y * s.y
    if R2 <= 0.0:
        raise DegenerateDirection(
            f"R^2 = {R2} is not positive at ({s.x}, {s.y}); "
            "the state lies outside the form's definite cone"
        )
    R = math.sqrt(R2)
    Rdot = (
        form.A * s.x * s.xdot
        + form.B * (s.x * s.ydot + s.y * s.xdot)
        + form.C * s.y * s.ydot
    ) / R
    thetadot = (s.x * s.ydot - s.y * s.xdot) / r2
    return PolarState(R, math.atan2(s.y, s.x), Rdot, thetadot, s.t)


def from_polar(p, form):
    """Inverse transform via r = R psi(theta), velocities by the chain rule."""
    if p.R <= 0.0:
        raise DegenerateDirection(f"R must be positive, got {p.R}")
    psi2 = psi_sq(p.theta, form)
    if psi2 <= 0.0:
        raise DegenerateDirection(
            f"psi^2 = {psi2} not positive along theta = {p.theta}"
        )
    psi = math.sqrt(psi2)
    dpsi = dpsi_dtheta(p.theta, form)
    c = math.cos(p.theta)
    s = math.sin(p.theta)
    rdot_radial = p.Rdot * psi + p.R * dpsi * p.thetadot
    x = p.R * psi * c
    y = p.R * psi * s
    xdot = rdot_radial * c - p.R * psi * s * p.thetadot
    ydot = rdot_radial * s + p.R * psi * c * p.thetadot
    return CartesianState(x, y, xdot, ydot, p.t)
