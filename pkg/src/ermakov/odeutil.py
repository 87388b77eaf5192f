"""Dormand-Prince 5(4) machinery shared by the integrators.

dynamics.integrate() carries an unrolled scalar copy of the same tableau
for the 4-component Ermakov state; this module provides the coefficients
plus a generic dense-output integrator for the small auxiliary ODEs
(alpha(t), phi(theta), t(theta)).
"""

import math
from bisect import bisect_right

import numpy as np

from .errors import StepUnderflow

# Dormand-Prince 5(4) tableau
C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = (
    9017 / 3168,
    -355 / 33,
    46732 / 5247,
    49 / 176,
    -5103 / 18656,
)
B1, B3, B4, B5, B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
E1, E3, E4, E5, E6, E7 = (
    71 / 57600,
    -71 / 16695,
    71 / 1920,
    -17253 / 339200,
    22 / 525,
    -1 / 40,
)
# continuous-extension weights (quintic dense output)
D1 = -12715105075 / 11282082432
D3 = 87487479700 / 32700410799
D4 = -10690763975 / 1880347072
D5 = 701980252875 / 199316789632
D6 = -1453857185 / 822651844
D7 = 69997945 / 29380423

# PI step controller (classic dopri5 settings)
SAFETY = 0.9
BETA = 0.04
EXPO1 = 0.2 - BETA * 0.75
FAC_MIN = 0.1  # divisor floor: step grows at most 10x
FAC_MAX = 5.0  # divisor cap: step shrinks at most 5x
H_MIN = 1e-14


def initial_step(f, t0, y0, f0, direction, rtol, atol, span):
    """Hairer's starting-step heuristic."""
    sc = atol + rtol * np.abs(y0)
    d0 = math.sqrt(float(np.mean((y0 / sc) ** 2)))
    d1 = math.sqrt(float(np.mean((f0 / sc) ** 2)))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    y1 = y0 + h0 * direction * f0
    f1 = np.asarray(f(t0 + h0 * direction, y1), dtype=float)
    d2 = math.sqrt(float(np.mean(((f1 - f0) / sc) ** 2))) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, span)


class DenseSolution:
    """Accepted steps with the quintic continuous extension between them.

    The segment polynomial is

        u(s) = r1 + s r2 + s(1-s) r3 + s^2(1-s) r4 + s^2(1-s)^2 r5

    with r1 = y0, r2 = y1-y0, r3 = h f0 - r2, r4 = r2 - h f1 - r3, and r5
    the stored stage combination (the D-weights above).  Without r5 the
    same formula degrades gracefully to cubic Hermite.
    """

    def __init__(self, ts, ys, fs, r5=None):
        self.ts = np.asarray(ts)
        self.ys = np.asarray(ys)
        self.fs = np.asarray(fs)
        self.r5 = None if r5 is None else np.asarray(r5)
        self._forward = self.ts[-1] >= self.ts[0]

    @property
    def t_end(self):
        return self.ts[-1]

    def _segment(self, t):
        if self._forward:
            i = bisect_right(self.ts, t) - 1
        else:
            i = int(np.searchsorted(-self.ts, -t, side="right")) - 1
        return int(np.clip(i, 0, len(self.ts) - 2))

    def _coeffs(self, i, h):
        y0, y1 = self.ys[i], self.ys[i + 1]
        f0, f1 = self.fs[i], self.fs[i + 1]
        r2 = y1 - y0
        r3 = h * f0 - r2
        r4 = r2 - h * f1 - r3
        r5 = self.r5[i] if self.r5 is not None else np.zeros_like(r2)
        return y0, r2, r3, r4, r5

    def __call__(self, t):
        ts = self.ts
        i = self._segment(t)
        h = ts[i + 1] - ts[i]
        if h == 0:
            return self.ys[i]
        s = (t - ts[i]) / h
        r1, r2, r3, r4, r5 = self._coeffs(i, h)
        s1 = 1.0 - s
        return r1 + s * (r2 + s1 * (r3 + s * (r4 + s1 * r5)))

    def derivative(self, t):
        """First derivative of the segment polynomial."""
        ts = self.ts
        i = self._segment(t)
        h = ts[i + 1] - ts[i]
        if h == 0:
            return self.fs[i]
        s = (t - ts[i]) / h
        _, r2, r3, r4, r5 = self._coeffs(i, h)
        du = (
            r2
            + (1.0 - 2.0 * s) * r3
            + s * (2.0 - 3.0 * s) * r4
            + 2.0 * s * (1.0 - s) * (1.0 - 2.0 * s) * r5
        )
        return du / h


def integrate_dense(f, t_span, y0, rtol=1e-10, atol=1e-10, max_step=math.inf,
                    step_hook=None):
    """Generic adaptive DP5(4) for small systems; returns a DenseSolution.

    f(t, y) -> array.  step_hook(t_prev, y_prev, t, y), when given, runs on
    every accepted step and may raise to abort (used for zero crossings).
    """
    t0, t1 = float(t_span[0]), float(t_span[1])
    y = np.asarray(y0, dtype=float).copy()
    direction = 1.0 if t1 >= t0 else -1.0
    span = abs(t1 - t0)
    if span == 0.0:
        f0 = np.asarray(f(t0, y), dtype=float)
        return DenseSolution([t0], [y], [f0])
    t = t0
    k1 = np.asarray(f(t, y), dtype=float)
    h = min(initial_step(f, t0, y, k1, direction, rtol, atol, span), max_step)
    ts, ys, fs, r5s = [t0], [y.copy()], [k1.copy()], []
    facold = 1e-4
    while (t1 - t) * direction > 0:
        h = min(h, abs(t1 - t), max_step)
        if h < H_MIN:
            raise StepUnderflow(f"step underflow at t = {t}")
        hs = h * direction
        k2 = np.asarray(f(t + C2 * hs, y + hs * (A21 * k1)), dtype=float)
        k3 = np.asarray(f(t + C3 * hs, y + hs * (A31 * k1 + A32 * k2)), dtype=float)
        k4 = np.asarray(
            f(t + C4 * hs, y + hs * (A41 * k1 + A42 * k2 + A43 * k3)), dtype=float
        )
        k5 = np.asarray(
            f(t + C5 * hs, y + hs * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4)),
            dtype=float,
        )
        k6 = np.asarray(
            f(
                t + hs,
                y + hs * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5),
            ),
            dtype=float,
        )
        y_new = y + hs * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6)
        k7 = np.asarray(f(t + hs, y_new), dtype=float)
        err_vec = hs * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7)
        sc = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = math.sqrt(float(np.mean((err_vec / sc) ** 2)))
        fac11 = err ** EXPO1 if err > 0 else 0.0
        if err <= 1.0:
            t_prev, y_prev = t, y
            t = t + hs
            r5s.append(
                hs * (D1 * k1 + D3 * k3 + D4 * k4 + D5 * k5 + D6 * k6 + D7 * k7)
            )
            y = y_new
            k1 = k7
            ts.append(t)
            ys.append(y.copy())
            fs.append(k1.copy())
            if step_hook is not None:
                step_hook(t_prev, y_prev, t, y)
            fac = max(FAC_MIN, min(FAC_MAX, fac11 / (facold ** BETA) / SAFETY))
            facold = max(err, 1e-4)
            h = h / fac
        else:
            h = h / min(FAC_MAX, fac11 / SAFETY)
    return DenseSolution(ts, ys, fs, r5s)
