"""Reduction of the point-symmetric family to quadratures.

Rescaled variables Rbar = R/rho, T = integral dt/rho^2 turn the Noether
invariant into the energy form

    J = 1/2 (dRbar/dT)^2 + W(Rbar),   W(Rbar) = U(Rbar) + kappa I / Rbar^2,

so Rbar(T) follows from inverting T(Rbar) = integral dRbar/sqrt(2(J - W))
piecewise between turning points (roots of J - W).  The integrable
endpoint singularity is removed by the substitution v^2 = |Rbar - Rturn|,
after which every branch integral has a bounded smooth integrand.  Each
branch also accumulates S = integral dT/Rbar^2 in the same variable, so
the angular phase needs no further radial inversions:

    theta(T) = Phi^{-1}(S(T)),   Phi(theta) = integral dtheta / h(theta; I).

theta is assumed monotone over a solve (h > 0); a vanishing radicand
raises AngularTurning with the boundary angle.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .dynamics import Trajectory
from .errors import (
    AngularTurning,
    EvalDomainError,
    ForbiddenRegion,
    InconsistentEnergy,
    NonPositiveRho,
    QuadratureFailure,
    ValidationError,
)
from .exprdsl import Antiderivative, Num
from .geometry import PolarState, from_polar, to_polar
from .invariants import ermakov_I_cart, hamiltonian, noether_J
from .linearize import h_of_theta
from .quadrature import adaptive_quadrature, panel_from_callable

_ENERGY_CONSISTENCY_TOL = 1e-10
_CIRCULAR_ENERGY_TOL = 1e-11
_CIRCULAR_SLOPE_TOL = 1e-8
_BRANCH_ANCHORS = 96
# the memoized F, G antiderivatives carry ~1e-12 evaluation jitter, so the
# angular phase integrals cannot resolve below that noise floor
_ANGULAR_TOL = 1e-11


class TimeRescale:
    """T(t) = integral_{t0}^{t} dtau / rho^2(tau), memoized."""

    def __init__(self, m, t0):
        self.t0 = float(t0)
        if m._rho_const is not None:
            inv = 1.0 / (m._rho_const * m._rho_const)
            self._linear = inv
            self._anti = None
        else:
            self._linear = None
            self._anti = Antiderivative(
                Num(1.0) / (m.rho_expr * m.rho_expr), "t", t0
            )
        self._m = m

    def __call__(self, t):
        if self._linear is not None:
            return (t - self.t0) * self._linear
        self._m.rho_val(t)  # endpoint positivity check
        try:
            return self._anti(t)
        except (EvalDomainError, QuadratureFailure) as exc:
            raise NonPositiveRho(
                f"rho appears to vanish between {self.t0} and {t}: {exc}"
            ) from None


def rescale_time(m, t, t0=0.0):
    """One-shot rescaled time; solve_by_quadrature keeps a memoized instance."""
    if m.potential_kind != "point_symmetric":
        raise ValidationError(["rescale_time requires a point-symmetric model"])
    return TimeRescale(m, t0)(t)


@dataclass
class EffectivePotential:
    """W(Rbar) = U(Rbar) + kappa I / Rbar^2 and its derivative."""

    m: object
    I: float

    def w(self, r):
        return self.m.u_val(r) + self.m.kappa * self.I / (r * r)

    def w_many(self, r):
        return self.m.u_val_many(r) + self.m.kappa * self.I / (r * r)

    def w_prime(self, r):
        return self.m.u_prime(r) - 2.0 * self.m.kappa * self.I / (r * r * r)


class _TurnBranch:
    """Cumulative time and angular-phase integrals away from one turning point.

    With Rbar = Rturn + orientation * v^2,
        time(v) = integral_0^v 2v' / sqrt(2 (J - W)) dv'
        s(v)    = same integrand / Rbar^2,
    both smooth at v = 0.
    """

    def __init__(self, w, J, r_turn, orientation, v_max):
        self.w = w
        self.J = J
        self.r_turn = r_turn
        self.orientation = orientation
        self.v_max = v_max
        self._grid = [0.0]
        self._cum_t = [0.0]
        self._cum_s = [0.0]
        self._extend_to(v_max)

    def _r_of_v(self, v):
        return self.r_turn + self.orientation * v * v

    def _integrands(self, vs):
        # J - W has a root at v = 0, so Q = (J - W)/v^2 is smooth, but the
        # direct quotient drowns in cancellation noise as v -> 0.  Below the
        # switch the midpoint-derivative form Q = -o W'(R* + o v^2/2),
        # accurate to O(v^4), keeps the relative noise bounded; Gauss-Kronrod
        # nodes are interior, so v > 0 on every panel.
        v = np.asarray(vs, dtype=float)
        v2 = v * v
        r = self._r_of_v(v)
        sw = 3e-5 * max(abs(self.r_turn), 0.1)
        near = v2 < sw
        q = np.empty_like(v2)
        far = ~near
        if far.any():
            q[far] = (self.J - self.w.w_many(r[far])) / v2[far]
        if near.any():
            r_mid = self.r_turn + self.orientation * 0.5 * v2[near]
            wp = np.asarray(self.w.m.u_prime_many(r_mid), dtype=float)
            wp -= 2.0 * self.w.m.kappa * self.w.I / (r_mid * r_mid * r_mid)
            q[near] = -self.orientation * wp
        q = np.maximum(q, 1e-300)
        base = 2.0 / np.sqrt(2.0 * q)
        return base, base / (r * r)

    def _extend_to(self, v_target):
        while self._grid[-1] < v_target - 1e-15:
            v0 = self._grid[-1]
            dv = max(self.v_max / _BRANCH_ANCHORS, 1e-12)
            v1 = min(v0 + dv, v_target) if v_target > self.v_max else min(
                v0 + dv, self.v_max
            )
            if v1 <= v0:
                break
            t_seg, _ = adaptive_quadrature(
                panel_from_callable(lambda u: self._integrands(u)[0]), v0, v1
            )
            s_seg, _ = adaptive_quadrature(
                panel_from_callable(lambda u: self._integrands(u)[1]), v0, v1
            )
            self._grid.append(v1)
            self._cum_t.append(self._cum_t[-1] + t_seg)
            self._cum_s.append(self._cum_s[-1] + s_seg)

    def _tail(self, v, which):
        i = np.searchsorted(self._grid, v) - 1
        i = int(np.clip(i, 0, len(self._grid) - 1))
        v0 = self._grid[i]
        cum = (self._cum_t if which == 0 else self._cum_s)[i]
        if v == v0:
            return cum
        seg, _ = adaptive_quadrature(
            panel_from_callable(lambda u: self._integrands(u)[which]), v0, v
        )
        return cum + seg

    def time_of_v(self, v):
        return self._tail(v, 0)

    def s_of_v(self, v):
        return self._tail(v, 1)

    @property
    def total_time(self):
        return self._cum_t[-1]

    @property
    def total_s(self):
        return self._cum_s[-1]

    def v_of_time(self, target):
        """Invert time(v) = target on [0, grid end]."""
        if target <= 0.0:
            return 0.0
        cum = self._cum_t
        i = int(np.clip(np.searchsorted(cum, target) - 1, 0, len(cum) - 2))
        lo, hi = self._grid[i], self._grid[i + 1]
        if target >= cum[-1]:
            return self._grid[-1]
        return brentq(lambda v: self.time_of_v(v) - target, lo, hi, xtol=1e-14)


class RadialSolution:
    """Rbar(T) with exact phase bookkeeping across turning points."""

    def __init__(self, m, I, J, rbar0, d_rbar0, T_end):
        self.w = EffectivePotential(m, I)
        self.J = float(J)
        self.rbar0 = float(rbar0)
        scale = max(1.0, abs(self.J))
        e0 = self.J - self.w.w(self.rbar0)
        if e0 < -_ENERGY_CONSISTENCY_TOL * scale:
            raise ForbiddenRegion(
                f"J = {self.J} lies below W(Rbar0) = {self.w.w(self.rbar0)}"
            )
        if abs(e0 - 0.5 * d_rbar0 * d_rbar0) > _ENERGY_CONSISTENCY_TOL * scale:
            raise InconsistentEnergy(
                f"J - W(Rbar0) = {e0} but (dRbar/dT)^2/2 = {0.5 * d_rbar0 ** 2}"
            )
        e0 = max(e0, 0.0)
        slope = self.w.w_prime(self.rbar0)
        self.turning_points = []
        if abs(e0) <= _CIRCULAR_ENERGY_TOL * scale and abs(slope) <= _CIRCULAR_SLOPE_TOL:
            self.kind = "circular"
            self.turning_points = [self.rbar0]
            return
        r_lo, r_hi = self._find_turnings(e0, slope)
        self.r_lo = r_lo
        self.r_hi = r_hi
        if r_hi is None:
            self.kind = "unbounded"
            self.turning_points = [r_lo]
            v_probe = math.sqrt(max(self.rbar0, 2.0 * r_lo) - r_lo)
            self.lower = _TurnBranch(self.w, self.J, r_lo, +1.0, v_probe)
            v0 = math.sqrt(max(self.rbar0 - r_lo, 0.0))
            zeta0 = self.lower.time_of_v(v0)
            self.zeta0 = zeta0 if d_rbar0 >= 0.0 else -zeta0
            # make sure the branch covers the whole requested span
            self._cover_unbounded(abs(self.zeta0) + T_end)
            return
        self.kind = "bounded"
        self.turning_points = [r_lo, r_hi]
        r_mid = 0.5 * (r_lo + r_hi)
        self.r_mid = r_mid
        self.lower = _TurnBranch(self.w, self.J, r_lo, +1.0, math.sqrt(r_mid - r_lo))
        self.upper = _TurnBranch(self.w, self.J, r_hi, -1.0, math.sqrt(r_hi - r_mid))
        self.half_t = self.lower.total_time + self.upper.total_time
        self.half_s = self.lower.total_s + self.upper.total_s
        phase = self._ascending_time(self.rbar0)
        self.phase0 = phase if d_rbar0 >= 0.0 else 2.0 * self.half_t - phase

    def _find_turnings(self, e0, slope):
        w = self.w
        J = self.J
        scale = max(1.0, abs(J))

        def e(r):
            return J - w.w(r)

        start_is_root = abs(e0) <= 1e-9 * scale
        r_lo = r_hi = None
        if start_is_root and slope < 0.0:
            r_lo = self.rbar0
        if start_is_root and slope > 0.0:
            r_hi = self.rbar0
        if r_lo is None:
            r_prev = self.rbar0
            r = self.rbar0
            found = False
            for _ in range(200):
                r /= 1.25
                if e(r) < 0.0:
                    r_lo = brentq(e, r, r_prev, xtol=1e-14, maxiter=200)
                    found = True
                    break
                r_prev = r
                if r < self.rbar0 * 1e-12:
                    break
            if not found:
                raise QuadratureFailure(
                    "no inner turning point; the motion reaches the center"
                )
        if r_hi is None:
            r_prev = self.rbar0
            r = self.rbar0
            for _ in range(120):
                r *= 1.25
                if e(r) < 0.0:
                    r_hi = brentq(e, r_prev, r, xtol=1e-14, maxiter=200)
                    break
                r_prev = r
        return r_lo, r_hi

    def _cover_unbounded(self, zeta_need):
        branch = self.lower
        while branch.total_time < zeta_need:
            branch.v_max *= 1.5
            branch._extend_to(branch.v_max)

    def _ascending_time(self, rbar):
        if rbar <= self.r_mid:
            return self.lower.time_of_v(math.sqrt(max(rbar - self.r_lo, 0.0)))
        return self.half_t - self.upper.time_of_v(
            math.sqrt(max(self.r_hi - rbar, 0.0))
        )

    def _ascending_state(self, xi):
        """(rbar, s_from_cycle_start) on the ascending half, xi in [0, half_t]."""
        if xi <= self.lower.total_time:
            v = self.lower.v_of_time(xi)
            return self.r_lo + v * v, self.lower.s_of_v(v)
        v = self.upper.v_of_time(self.half_t - xi)
        return self.r_hi - v * v, self.half_s - self.upper.s_of_v(v)

    def _phase_state(self, phase):
        """(rbar, sign, cumulative S from phase 0) for phase >= 0."""
        if self.kind == "circular":
            return self.rbar0, 0.0, phase / (self.rbar0 * self.rbar0)
        if self.kind == "unbounded":
            sgn = 1.0 if phase >= 0.0 else -1.0
            self._cover_unbounded(abs(phase))
            v = self.lower.v_of_time(abs(phase))
            return self.r_lo + v * v, sgn, sgn * self.lower.s_of_v(v)
        two_t = 2.0 * self.half_t
        n = math.floor(phase / two_t)
        xi = phase - n * two_t
        s_cycles = n * 2.0 * self.half_s
        if xi <= self.half_t:
            rbar, s = self._ascending_state(xi)
            return rbar, +1.0, s_cycles + s
        rbar, s = self._ascending_state(two_t - xi)
        return rbar, -1.0, s_cycles + 2.0 * self.half_s - s

    def value(self, T):
        """(rbar, d rbar/dT) at rescaled time T past the initial point."""
        rbar, sgn, _ = self._phase_state(self._phase(T))
        speed = math.sqrt(max(0.0, 2.0 * (self.J - self.w.w(rbar))))
        return rbar, sgn * speed

    def s_integral(self, T):
        """S(T) = integral_0^T dT'/rbar^2 along the motion."""
        _, _, s_now = self._phase_state(self._phase(T))
        _, _, s_start = self._phase_state(self._phase(0.0))
        return s_now - s_start

    def _phase(self, T):
        if self.kind == "circular":
            return T
        if self.kind == "unbounded":
            return self.zeta0 + T
        return self.phase0 + T

    def table(self, Ts):
        return np.array([self.value(T) for T in np.atleast_1d(Ts)])


class AngularSolution:
    """theta(T) from Phi(theta) = S(T) by monotone inversion."""

    def __init__(self, m, I, theta0, radial, direction):
        if direction == 0.0:
            raise AngularTurning(
                "thetadot = 0 at the initial state; theta is not monotone",
                theta=theta0,
            )
        self.m = m
        self.I = I
        self.theta0 = float(theta0)
        self.radial = radial
        self.sign = 1.0 if direction > 0.0 else -1.0
        self._grid = [self.theta0]
        self._cum = [0.0]
        self._turn = None
        self._limit = None
        h_of_theta(theta0, I, m)  # validates the starting radicand

    def _inv_h(self, thetas):
        return np.array(
            [1.0 / h_of_theta(th, self.I, self.m) for th in np.atleast_1d(thetas)]
        )

    def _radicand(self, theta):
        from .linearize import _radicand

        return _radicand(theta, self.I, self.m)

    def _extend(self, phi_target):
        step = 0.05 * self.sign
        floor = 1e-9 * max(1.0, abs(self.I))
        while self._cum[-1] < phi_target:
            th0 = self._grid[-1]
            if self._limit is not None:
                if (th0 - self._limit) * self.sign >= 0.0:
                    raise AngularTurning(
                        f"theta reaches a turning point at {self._turn}; the "
                        "angular quadrature stops there (use the direct "
                        "integrator for this motion)",
                        theta=self._turn,
                    )
                th1 = th0 + step
                if (th1 - self._limit) * self.sign > 0.0:
                    th1 = self._limit
            else:
                th1 = th0 + step
                try:
                    bad = self._radicand(th1) <= floor
                except EvalDomainError:
                    bad = True
                if bad:
                    # locate the turning angle, then stop the usable range
                    # where the radicand still clears the noise floor
                    self._turn = brentq(
                        lambda th: self._radicand(th),
                        min(th0, th1), max(th0, th1), xtol=1e-13,
                    )
                    self._limit = brentq(
                        lambda th: self._radicand(th) - floor,
                        min(th0, self._turn), max(th0, self._turn), xtol=1e-13,
                    )
                    continue
            seg, _ = adaptive_quadrature(
                panel_from_callable(self._inv_h), th0, th1,
                abs_tol=_ANGULAR_TOL, rel_tol=_ANGULAR_TOL,
            )
            self._grid.append(th1)
            self._cum.append(self._cum[-1] + abs(seg))

    def phi_of_theta(self, theta):
        """Angular phase integral from theta0 along the motion direction."""
        target_side = (theta - self.theta0) * self.sign
        if target_side < 0.0:
            raise ValidationError(["theta lies behind the starting angle"])
        i = int(
            np.clip(
                np.searchsorted(
                    np.asarray(self._grid) * self.sign, theta * self.sign
                )
                - 1,
                0,
                len(self._grid) - 1,
            )
        )
        th0 = self._grid[i]
        seg, _ = adaptive_quadrature(
            panel_from_callable(self._inv_h), th0, theta,
            abs_tol=_ANGULAR_TOL, rel_tol=_ANGULAR_TOL,
        )
        return self._cum[i] + abs(seg)

    def theta_of_s(self, s_target):
        if s_target < 0.0:
            raise ValidationError(["angular phase must be non-negative"])
        if s_target == 0.0:
            return self.theta0
        self._extend(s_target)
        cum = self._cum
        i = int(np.clip(np.searchsorted(cum, s_target) - 1, 0, len(cum) - 2))
        lo, hi = self._grid[i], self._grid[i + 1]
        return brentq(
            lambda th: self.phi_of_theta(th) - s_target,
            min(lo, hi),
            max(lo, hi),
            xtol=1e-13,
        )

    def theta_of_T(self, T):
        return self.theta_of_s(self.radial.s_integral(T))

    def table(self, Ts):
        return np.array([self.theta_of_T(T) for T in np.atleast_1d(Ts)])


def solve_radial(m, I, J, rbar0, d_rbar0, T_span):
    """Radial quadrature solution over a rescaled-time span."""
    if m.potential_kind != "point_symmetric":
        raise ValidationError(["solve_radial requires a point-symmetric model"])
    T_end = float(T_span[1]) - float(T_span[0])
    return RadialSolution(m, I, J, rbar0, d_rbar0, T_end)


def solve_angular(m, I, theta0, radial, T_span, direction=1.0):
    """Angular quadrature solution theta(T) given the radial table."""
    return AngularSolution(m, I, theta0, radial, direction)


@dataclass
class QuadratureSolution:
    I: float
    J: float
    time_rescale: TimeRescale
    radial: RadialSolution
    angular: AngularSolution
    turning_points: list = field(default_factory=list)


def solve_by_quadrature(m, init, t_span, samples=200, t_eval=None):
    """Full reduction to quadratures; returns a Trajectory on the grid."""
    if m.potential_kind != "point_symmetric":
        raise ValidationError(["solve_by_quadrature requires a point-symmetric model"])
    t0, t1 = float(t_span[0]), float(t_span[1])
    if t_eval is None:
        t_eval = np.linspace(t0, t1, samples)
    else:
        t_eval = np.asarray(t_eval, dtype=float)
    p0 = to_polar(init, m.form)
    I = ermakov_I_cart(init, m)
    J = noether_J(init, m)
    rho0, rd0, _ = m.rho_derivs(t0)
    rbar0 = p0.R / rho0
    d_rbar0 = p0.Rdot * rho0 - p0.R * rd0
    rescale = TimeRescale(m, t0)
    T_end = rescale(t1)
    radial = RadialSolution(m, I, J, rbar0, d_rbar0, T_end)
    angular = AngularSolution(m, I, p0.theta, radial, p0.thetadot)
    sol = QuadratureSolution(I, J, rescale, radial, angular,
                             list(radial.turning_points))

    rows = []
    Is, Js, Hs = [], [], []
    ts_out = []
    for t in t_eval:
        T = rescale(t)
        rbar, d_rbar = radial.value(T)
        theta = angular.theta_of_T(T)
        rho, rd, _ = m.rho_derivs(t)
        R = rho * rbar
        Rdot = rd * rbar + d_rbar / rho
        thetadot = angular.sign * h_of_theta(theta, I, m) / (R * R)
        s = from_polar(PolarState(R, theta, Rdot, thetadot, t), m.form)
        rows.append((s.x, s.y, s.xdot, s.ydot))
        ts_out.append(t)
        Is.append(ermakov_I_cart(s, m))
        Js.append(noether_J(s, m))
        Hs.append(hamiltonian(s, m))
    tr = Trajectory(ts_out, rows, Is, J=Js, H=Hs, method="quadrature")
    tr.detail = sol
    return tr
