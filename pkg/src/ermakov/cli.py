"""Command-line surface: run, verify, compare.

    ermakov run <scenario.json> [--out DIR]
    ermakov verify <scenario.json> [--out DIR] [--corrupt-gauge]
    ermakov compare <scenario.json> --methods direct,quadrature,linearize [--out DIR]

Exit codes: 0 success, 1 verification claim failed, 2 scenario schema
error (the message lists every violation), 3 runtime model error (axis
hit, rho <= 0, degenerate direction, ...).

Outputs are deterministic for a fixed scenario and seed: trajectory CSV
columns are exactly t,x,y,xdot,ydot,R,theta,I,J,H (J and H blank for
generic potentials) with numbers rendered at 17 significant digits; the
report is a JSON object with stable field order.  Wall-clock timings from
`compare` live only in its CSV and are the one non-deterministic output.
"""

import argparse
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from .dynamics import integrate, series_drift
from .errors import ErmakovError, ValidationError
from .geometry import CartesianState, to_polar
from .invariants import ermakov_I_cart, ermakov_I_polar, hamiltonian, noether_J
from .linearize import alpha_solve, classify_linearisable, integrate_linear, reconstruct
from .noether import (
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
from .exprdsl import Num, Var
from .scenario import load_scenario, sample_states_near
from .solver import solve_by_quadrature

FMT = ".17g"


def _f(x):
    return format(float(x), FMT)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(format(float(obj), FMT))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    return obj


def _write_report(report, out_dir, name):
    path = Path(out_dir) / f"{name}_report.json"
    path.write_text(json.dumps(_jsonable(report), indent=2) + "\n", encoding="utf-8")
    return path


def _trajectory_rows(sc):
    tr = integrate(sc.model, sc.init, (sc.t0, sc.t1), sc.cfg)
    grid = np.linspace(sc.t0, sc.t1, sc.samples)
    states = tr.sample(grid)
    point_symmetric = sc.model.potential_kind == "point_symmetric"
    rows = []
    I_col, J_col, H_col = [], [], []
    for t, (x, y, vx, vy) in zip(grid, states):
        s = CartesianState(x, y, vx, vy, t)
        p = to_polar(s, sc.model.form)
        I = ermakov_I_cart(s, sc.model)
        I_col.append(I)
        if point_symmetric:
            Jv = noether_J(s, sc.model)
            Hv = hamiltonian(s, sc.model)
            J_col.append(Jv)
            H_col.append(Hv)
            jtxt, htxt = _f(Jv), _f(Hv)
        else:
            jtxt = htxt = ""
        rows.append(
            ",".join(
                [_f(t), _f(x), _f(y), _f(vx), _f(vy), _f(p.R), _f(p.theta), _f(I),
                 jtxt, htxt]
            )
        )
    drift = {"I": series_drift(I_col)}
    if point_symmetric:
        drift["J"] = series_drift(J_col)
        drift["H"] = series_drift(H_col)
    return tr, rows, drift


def cmd_run(sc, out_dir):
    tr, rows, drift = _trajectory_rows(sc)
    csv_path = Path(out_dir) / f"{sc.name}_trajectory.csv"
    header = "t,x,y,xdot,ydot,R,theta,I,J,H"
    csv_path.write_text(header + "\n" + "\n".join(rows) + "\n", encoding="utf-8")
    report = {
        "v": 1,
        "scenario": sc.name,
        "command": "run",
        "status": "ok",
        "samples": sc.samples,
        "integrator": {
            "steps": tr.nsteps,
            "rejections": tr.nrejected,
            "rel_tol": sc.cfg.rel_tol,
            "abs_tol": sc.cfg.abs_tol,
        },
        "grid_drift": drift,
    }
    _write_report(report, out_dir, sc.name)
    print(json.dumps(_jsonable(report), indent=2))
    return 0


# -- verify ------------------------------------------------------------------


def _claim(name, status, measured, threshold, detail=""):
    return {
        "name": name,
        "status": status,
        "measured": measured,
        "threshold": threshold,
        "detail": detail,
    }


def _check(name, measured, threshold, detail=""):
    status = "PASS" if measured <= threshold else "FAIL"
    return _claim(name, status, measured, threshold, detail)


def cmd_verify(sc, out_dir, corrupt_gauge=False):
    m = sc.model
    rng = np.random.default_rng(sc.seed)
    point_symmetric = m.potential_kind == "point_symmetric"
    claims = []

    tr = integrate(m, sc.init, (sc.t0, sc.t1), sc.cfg)
    from .dynamics import drift_report

    drift = drift_report(tr)
    claims.append(
        _check("ermakov_invariant_drift", drift["I"]["max_drift"], 1e-8,
               f"argmax t = {drift['I']['t_at_max']:.6g}")
    )
    if point_symmetric:
        claims.append(
            _check("noether_invariant_drift", drift["J"]["max_drift"], 1e-8,
                   f"argmax t = {drift['J']['t_at_max']:.6g}")
        )
    else:
        claims.append(_claim("noether_invariant_drift", "SKIPPED", None, 1e-8,
                             "generic potential has no Noether invariant"))

    states = sample_states_near(sc.init, m, rng, 1000,
                                t_jitter=max(0.0, sc.t1 - sc.t0) * 0.2)
    if point_symmetric:
        gen = corrupted_point_symmetry(m) if corrupt_gauge else point_symmetry(m)
        worst = 0.0
        used = 0
        for s in states:
            try:
                r = abs(noether_residual(gen, s, m)) / (1.0 + abs(m.lagrangian(s)))
            except ErmakovError:
                continue
            used += 1
            worst = max(worst, r)
        detail = f"{used} states"
        if corrupt_gauge:
            detail += ", gauge corrupted for negative control"
        claims.append(
            _check("noether_point_symmetry_residual", worst, 1e-9, detail)
        )
    else:
        claims.append(_claim("noether_point_symmetry_residual", "SKIPPED", None,
                             1e-9, "generic potential"))

    taus = [
        ("0", ConstField(0.0)),
        ("1", ConstField(1.0)),
        (
            "R^2*thetadot",
            ExprField(
                (Num(m.A) * Var("x") * Var("x")
                 + Num(2.0 * m.B) * Var("x") * Var("y")
                 + Num(m.C) * Var("y") * Var("y"))
                * (Var("x") * Var("ydot") - Var("y") * Var("xdot"))
                / (Var("x") * Var("x") + Var("y") * Var("y"))
            ),
        ),
    ]
    worst = 0.0
    for _, tau in taus:
        gen = converse_generator(m, tau)
        for s in states[:100]:
            dR, dth = generator_polar_components(gen, s, m)
            p = to_polar(s, m.form)
            tv = gen.tau.value(s, m)
            worst = max(
                worst,
                abs(dR - tv * p.Rdot),
                abs(dth - (-p.R ** 2 * p.thetadot / m.kappa + tv * p.thetadot)),
            )
    claims.append(_check("converse_generator_polar_match", worst, 1e-10,
                         "tau in {0, 1, R^2*thetadot}"))

    cat = phase_catalog(m)
    pts = []
    for s in states[:100]:
        px, py = m.momenta(s)
        pts.append((s.x, s.y, px, py, s.t))
    canonical = max(
        abs(poisson_bracket(cat["x"], cat["px"], pt) - 1.0) for pt in pts
    )
    canonical = max(
        canonical, max(abs(poisson_bracket(cat["I"], cat["I"], pt)) for pt in pts)
    )
    claims.append(_check("canonical_brackets", canonical, 1e-12,
                         "{x,px}=1 and {I,I}=0"))
    if point_symmetric:
        worst = max(abs(poisson_bracket(cat["I"], cat["J"], pt)) for pt in pts)
        claims.append(_check("involution_I_J", worst, 1e-8, "100 phase points"))
    else:
        claims.append(_claim("involution_I_J", "SKIPPED", None, 1e-8,
                             "generic potential"))

    worst = 0.0
    for s in states:
        icart = ermakov_I_cart(s, m)
        ipolar = ermakov_I_polar(to_polar(s, m.form), m)
        worst = max(worst, abs(icart - ipolar) / max(1.0, abs(icart)))
    claims.append(_check("polar_cartesian_I_equality", worst, 1e-12,
                         "1000 states"))

    failed = any(c["status"] == "FAIL" for c in claims)
    for c in claims:
        mea = "-" if c["measured"] is None else f"{c['measured']:.3e}"
        print(f"[{c['status']:>7}] {c['name']}: measured {mea} "
              f"(threshold {c['threshold']:.1e}) {c['detail']}")
    report = {
        "v": 1,
        "scenario": sc.name,
        "command": "verify",
        "status": "fail" if failed else "pass",
        "claims": claims,
    }
    _write_report(report, out_dir, sc.name)
    return 1 if failed else 0


# -- compare -----------------------------------------------------------------


def _run_linearize(sc, grid):
    m = sc.model
    if m.potential_kind != "point_symmetric":
        return None, "generic potential admits no linearization path"
    cls = classify_linearisable(m)
    if not cls.linearisable:
        return None, "NotLinearisable: U outside both admissible families"
    p0 = to_polar(sc.init, m.form)
    if p0.thetadot <= 0.0:
        return None, "linearization path implemented for increasing theta"
    alpha = alpha_solve(m, cls, (sc.t0, sc.t1))
    I = ermakov_I_cart(sc.init, m)
    phi0 = alpha(sc.t0) / p0.R
    phidot0 = alpha.d1(sc.t0) / p0.R - alpha(sc.t0) * p0.Rdot / (p0.R * p0.R)
    dphi0 = phidot0 / p0.thetadot
    span = 2.0 * math.pi
    from .errors import AngularTurning

    while True:
        phi = integrate_linear(m, I, cls, phi0, dphi0,
                               (p0.theta, p0.theta + span))
        try:
            tr = reconstruct(phi, alpha, m, I, p0.theta, sc.t0, t_eval=grid)
            return tr, ""
        except AngularTurning as exc:
            if "cannot reach" in str(exc) and span < 256.0 * math.pi:
                span *= 2.0
                continue
            raise


def cmd_compare(sc, out_dir, methods):
    grid = np.linspace(sc.t0, sc.t1, sc.samples)
    results = {}
    status = {}
    timings = {}
    for name in methods:
        t_start = time.perf_counter()
        try:
            if name == "direct":
                tr = integrate(sc.model, sc.init, (sc.t0, sc.t1), sc.cfg)
                xy = tr.sample(grid)[:, :2]
            elif name == "quadrature":
                if sc.model.potential_kind != "point_symmetric":
                    status[name] = ("SKIPPED",
                                    "quadrature reduction needs the "
                                    "point-symmetric family")
                    continue
                tr = solve_by_quadrature(sc.model, sc.init, (sc.t0, sc.t1),
                                         t_eval=grid)
                xy = np.asarray(tr.states)[:, :2]
            elif name == "linearize":
                tr, reason = _run_linearize(sc, grid)
                if tr is None:
                    status[name] = ("SKIPPED", reason)
                    continue
                xy = np.asarray(tr.states)[:, :2]
            else:
                status[name] = ("SKIPPED", f"unknown method '{name}'")
                continue
        except ErmakovError as exc:
            status[name] = ("SKIPPED", f"{type(exc).__name__}: {exc}")
            continue
        timings[name] = time.perf_counter() - t_start
        results[name] = xy
        status[name] = ("ok", "")

    pairs = {}
    names = [n for n in methods if n in results]
    for i in range(len(names)):
        for j in range(i + 1, len(names)):
            a, b = names[i], names[j]
            diff = np.abs(results[a] - results[b])
            pairs[f"{a}_vs_{b}"] = {
                "max_dx": float(diff[:, 0].max()),
                "max_dy": float(diff[:, 1].max()),
            }

    lines = ["kind,name,max_dx,max_dy,seconds"]
    for name in methods:
        st, reason = status.get(name, ("SKIPPED", "not requested"))
        sec = _f(timings[name]) if name in timings else ""
        label = f"{name} ({st}{(': ' + reason) if reason else ''})"
        label = label.replace(",", ";")
        lines.append(f"method,{label},,,{sec}")
    for key, d in pairs.items():
        lines.append(f"pair,{key},{_f(d['max_dx'])},{_f(d['max_dy'])},")
    csv_path = Path(out_dir) / f"{sc.name}_compare.csv"
    csv_path.write_text("\n".join(lines) + "\n", encoding="utf-8")

    report = {
        "v": 1,
        "scenario": sc.name,
        "command": "compare",
        "status": "ok",
        "methods": {
            name: {"status": status[name][0], "reason": status[name][1]}
            for name in methods if name in status
        },
        "pairs": pairs,
    }
    _write_report(report, out_dir, sc.name)
    print(json.dumps(_jsonable(report), indent=2))
    return 0


# -- entry point ---------------------------------------------------------------


def _build_parser():
    ap = argparse.ArgumentParser(
        prog="ermakov",
        description="Numerical laboratory for Lagrangian Ermakov systems",
    )
    sub = ap.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="integrate a scenario; emit CSV + report")
    p_run.add_argument("scenario")
    p_run.add_argument("--out", default=".")
    p_ver = sub.add_parser("verify", help="run the conservation/symmetry claims")
    p_ver.add_argument("scenario")
    p_ver.add_argument("--out", default=".")
    p_ver.add_argument("--corrupt-gauge", action="store_true",
                       help="negative control: corrupt the point-symmetry gauge")
    p_cmp = sub.add_parser("compare", help="cross-check solution methods")
    p_cmp.add_argument("scenario")
    p_cmp.add_argument("--out", default=".")
    p_cmp.add_argument("--methods", default="direct,quadrature,linearize")
    return ap


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        sc = load_scenario(args.scenario)
    except ValidationError as exc:
        print("scenario rejected:", file=sys.stderr)
        for p in exc.problems:
            print(f"  - {p}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"cannot read scenario: {exc}", file=sys.stderr)
        return 2
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        if args.command == "run":
            return cmd_run(sc, out_dir)
        if args.command == "verify":
            return cmd_verify(sc, out_dir, corrupt_gauge=args.corrupt_gauge)
        methods = [m.strip() for m in args.methods.split(",") if m.strip()]
        return cmd_compare(sc, out_dir, methods)
    except ErmakovError as exc:
        print(f"runtime model error ({type(exc).__name__}): {exc}",
              file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
