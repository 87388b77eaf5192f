#!/usr/bin/env python3
"""Benchmark the compiled expression kernel against the pure-Python fallback.

Measures the raw kernel entry points on representative programs (the hot
loops of the right-hand side and of the antiderivative quadrature), then an
end-to-end fixture integration in a subprocess per backend.

Usage: python3 benchmarks/bench_backends.py
"""

import os
import subprocess
import sys
import time
import timeit

import numpy as np

from ermakov._kernel import evalcore_py
from ermakov.exprdsl import compile_expr, parse_expr

try:
    from ermakov._kernel import _evalcore
except ImportError:
    _evalcore = None

PROGRAMS = {
    "coupling f(l) = l": ("lambda", ("lambda",)),
    "profile U'(s)": ("-2*2.5/s^3 + s", ("s",)),
    "scale rho(t)": ("sqrt(1+t^2)", ("t",)),
    "vbar(R,t)": ("-R^2/(2*(1+t^2)) + (R/sqrt(1+t^2))^2", ("R", "t")),
}

END_TO_END = """
import time
import numpy as np
from ermakov import catalog
from ermakov.dynamics import integrate, IntegratorConfig
import ermakov
fx = catalog.get("gen_fg")
rng = np.random.default_rng(7)
states = fx.sample_states(3, rng)
t0 = time.perf_counter()
for s in states:
    integrate(fx.model, s, (0.0, 10.0), IntegratorConfig())
print(f"{ermakov.KERNEL_BACKEND} {time.perf_counter() - t0:.3f}")
"""


def bench_kernels():
    backends = [("python", evalcore_py)]
    if _evalcore is not None:
        backends.insert(0, ("compiled", _evalcore))
    rows = []
    for label, (text, varnames) in PROGRAMS.items():
        prog = compile_expr(parse_expr(text, set(varnames)), varnames)
        args = np.full(len(varnames), 1.3)
        xs = np.linspace(0.5, 2.0, 1024)
        out = np.empty_like(xs)
        for name, impl in backends:
            n = 20000
            dt = timeit.timeit(
                lambda: impl.eval_scalar(prog.code, prog.consts, args), number=n
            )
            scalar_us = dt / n * 1e6
            if len(varnames) == 1:
                nv = 2000
                dtv = timeit.timeit(
                    lambda: impl.eval_vector(prog.code, prog.consts, xs, out),
                    number=nv,
                )
                vec_us = dtv / nv * 1e6
                ng = 20000
                dtg = timeit.timeit(
                    lambda: impl.gk15(prog.code, prog.consts, 0.5, 0.6), number=ng
                )
                gk_us = dtg / ng * 1e6
            else:
                vec_us = gk_us = float("nan")
            rows.append((label, name, scalar_us, vec_us, gk_us))
    print(f"{'program':22s} {'backend':9s} {'scalar us':>10s} "
          f"{'vector(1k) us':>14s} {'gk15 us':>9s}")
    for label, name, s_us, v_us, g_us in rows:
        print(f"{label:22s} {name:9s} {s_us:10.2f} {v_us:14.2f} {g_us:9.2f}")


def bench_end_to_end():
    print("\nend-to-end: 3 seeded gen_fg trajectories, t in [0, 10], tol 1e-10")
    for env_extra in ({}, {"ERMAKOV_PURE_PYTHON": "1"}):
        env = dict(os.environ, **env_extra)
        res = subprocess.run(
            [sys.executable, "-c", END_TO_END], env=env, capture_output=True,
            text=True,
        )
        line = res.stdout.strip() or res.stderr.strip()
        print(f"  {line} s")


if __name__ == "__main__":
    bench_kernels()
    bench_end_to_end()
