"""Scenario files: the JSON schema (v1) behind the command-line surface.

A scenario bundles one model, one initial state, a time grid, integrator
settings and a seed:

    {
      "v": 1,
      "name": "iso_ho",
      "model": {
        "form": {"A": 1.0, "B": 0.0, "C": 1.0},
        "f": "0", "g": "0",
        "lambda0_f": 1.0, "lambda0_g": 1.0,
        "potential": {
          "kind": "point_symmetric",
          "rho": "1",
          "U": {"kind": "expr", "expr": "s^2/2"}
        }
      },
      "initial": {"x": 1.0, "y": 0.0, "xdot": 0.0, "ydot": 1.0, "t": 0.0},
      "time": {"t0": 0.0, "t1": 6.283185307179586, "samples": 201},
      "integrator": {"rel_tol": 1e-10, "abs_tol": 1e-10, "max_step": null,
                     "dense_output": true, "axis_guard": 1e-8},
      "seed": 42
    }

Potential kinds: "generic" (field "vbar") or "point_symmetric" (fields
"rho" and "U"); U kinds: "expr", "inverse_square_coulomb" (a, b),
"inverse_square_harmonic" (a, c).  Validation collects every violation
before failing so one round trip reports all problems.
"""

import json
import math
from dataclasses import dataclass

from .dynamics import IntegratorConfig
from .errors import ValidationError
from .geometry import CartesianState
from .model import (
    InverseSquareCoulomb,
    InverseSquareHarmonic,
    validate_model,
)

SCHEMA_VERSION = 1


@dataclass
class Scenario:
    name: str
    model: object
    init: CartesianState
    t0: float
    t1: float
    samples: int
    cfg: IntegratorConfig
    seed: int


def _num(problems, obj, path, default=None, required=True):
    if not isinstance(obj, dict) or path.split(".")[-1] not in obj:
        if required:
            problems.append(f"missing field '{path}'")
        return default
    v = obj[path.split(".")[-1]]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        problems.append(f"field '{path}' must be a number, got {v!r}")
        return default
    if not math.isfinite(v):
        problems.append(f"field '{path}' must be finite, got {v!r}")
        return default
    return float(v)


def _text(problems, obj, path, default=None, required=True):
    key = path.split(".")[-1]
    if not isinstance(obj, dict) or key not in obj:
        if required:
            problems.append(f"missing field '{path}'")
        return default
    v = obj[key]
    if not isinstance(v, str):
        problems.append(f"field '{path}' must be a string, got {v!r}")
        return default
    return v


def _parse_u(problems, u):
    if not isinstance(u, dict):
        problems.append("field 'model.potential.U' must be an object")
        return None
    kind = _text(problems, u, "model.potential.U.kind")
    if kind == "expr":
        return _text(problems, u, "model.potential.U.expr")
    if kind == "inverse_square_coulomb":
        a = _num(problems, u, "model.potential.U.a")
        b = _num(problems, u, "model.potential.U.b")
        return InverseSquareCoulomb(a or 0.0, b or 0.0)
    if kind == "inverse_square_harmonic":
        a = _num(problems, u, "model.potential.U.a")
        c = _num(problems, u, "model.potential.U.c")
        return InverseSquareHarmonic(a or 0.0, c or 0.0)
    if kind is not None:
        problems.append(f"unknown U kind '{kind}'")
    return None


def parse_scenario(doc, default_name="scenario"):
    """Validate a decoded JSON document; raises ValidationError with every
    violation found."""
    problems = []
    if not isinstance(doc, dict):
        raise ValidationError(["scenario document must be a JSON object"])
    v = doc.get("v")
    if v != SCHEMA_VERSION:
        problems.append(f"schema version 'v' must be {SCHEMA_VERSION}, got {v!r}")
    name = doc.get("name", default_name)
    if not isinstance(name, str):
        problems.append("field 'name' must be a string")
        name = default_name

    model_doc = doc.get("model")
    model = None
    if not isinstance(model_doc, dict):
        problems.append("missing object 'model'")
    else:
        form_doc = model_doc.get("form")
        A = B = C = 0.0
        if not isinstance(form_doc, dict):
            problems.append("missing object 'model.form'")
        else:
            A = _num(problems, form_doc, "model.form.A")
            B = _num(problems, form_doc, "model.form.B")
            C = _num(problems, form_doc, "model.form.C")
        f = _text(problems, model_doc, "model.f", default="0", required=False)
        g = _text(problems, model_doc, "model.g", default="0", required=False)
        l0f = _num(problems, model_doc, "model.lambda0_f", default=1.0,
                   required=False)
        l0g = _num(problems, model_doc, "model.lambda0_g", default=1.0,
                   required=False)
        pot = model_doc.get("potential")
        vbar = rho = u_spec = None
        if not isinstance(pot, dict):
            problems.append("missing object 'model.potential'")
        else:
            kind = _text(problems, pot, "model.potential.kind")
            if kind == "generic":
                vbar = _text(problems, pot, "model.potential.vbar")
            elif kind == "point_symmetric":
                rho = _text(problems, pot, "model.potential.rho")
                u_spec = _parse_u(problems, pot.get("U"))
                if u_spec is None and "U" not in pot:
                    problems.append("missing field 'model.potential.U'")
            elif kind is not None:
                problems.append(f"unknown potential kind '{kind}'")
        if not problems and A is not None:
            try:
                model = validate_model(
                    form=(A, B, C), f=f, g=g, lambda0_f=l0f, lambda0_g=l0g,
                    vbar=vbar, rho=rho, U=u_spec,
                )
            except ValidationError as exc:
                problems.extend(exc.problems)

    init_doc = doc.get("initial")
    init = None
    if not isinstance(init_doc, dict):
        problems.append("missing object 'initial'")
    else:
        x = _num(problems, init_doc, "initial.x")
        y = _num(problems, init_doc, "initial.y")
        xd = _num(problems, init_doc, "initial.xdot")
        yd = _num(problems, init_doc, "initial.ydot")
        it = _num(problems, init_doc, "initial.t", default=0.0, required=False)
        if None not in (x, y, xd, yd):
            init = CartesianState(x, y, xd, yd, it)

    time_doc = doc.get("time")
    t0 = t1 = 0.0
    samples = 0
    if not isinstance(time_doc, dict):
        problems.append("missing object 'time'")
    else:
        t0 = _num(problems, time_doc, "time.t0")
        t1 = _num(problems, time_doc, "time.t1")
        samples = time_doc.get("samples")
        if not isinstance(samples, int) or isinstance(samples, bool) or samples < 2:
            problems.append("field 'time.samples' must be an integer >= 2")
            samples = 2

    cfg_doc = doc.get("integrator", {})
    cfg = None
    if not isinstance(cfg_doc, dict):
        problems.append("field 'integrator' must be an object")
    else:
        rel = _num(problems, cfg_doc, "integrator.rel_tol", default=1e-10,
                   required=False)
        abs_ = _num(problems, cfg_doc, "integrator.abs_tol", default=1e-10,
                    required=False)
        max_step = cfg_doc.get("max_step")
        if max_step is not None:
            max_step = _num(problems, cfg_doc, "integrator.max_step",
                            default=math.inf, required=False)
        dense = cfg_doc.get("dense_output", True)
        if not isinstance(dense, bool):
            problems.append("field 'integrator.dense_output' must be a boolean")
            dense = True
        guard = _num(problems, cfg_doc, "integrator.axis_guard", default=1e-8,
                     required=False)
        try:
            cfg = IntegratorConfig(
                rel_tol=rel, abs_tol=abs_,
                max_step=math.inf if max_step is None else max_step,
                dense_output=dense, eps_axis=guard,
            )
        except ValueError as exc:
            problems.append(f"integrator: {exc}")

    seed = doc.get("seed", 42)
    if not isinstance(seed, int) or isinstance(seed, bool):
        problems.append("field 'seed' must be an integer")
        seed = 42

    if problems:
        raise ValidationError(problems)
    return Scenario(name, model, init, t0, t1, samples, cfg, seed)


def load_scenario(path):
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError([f"invalid JSON: {exc}"]) from None
    stem = str(path).rsplit("/", 1)[-1]
    stem = stem[:-5] if stem.endswith(".json") else stem
    return parse_scenario(doc, default_name=stem)


def sample_states_near(init, m, rng, n, spread=0.35, t_jitter=0.0):
    """Seeded valid states around a scenario's initial state.

    Positions and velocities get additive perturbations scaled to the
    initial magnitudes; proposals outside the form's definite cone or too
    close to a guarded axis are rejected and redrawn.
    """
    rsc = max(1.0, math.hypot(init.x, init.y))
    vsc = max(1.0, math.hypot(init.xdot, init.ydot))
    couple = not (m.f_zero and m.g_zero)
    out = []
    while len(out) < n:
        x = init.x + spread * rsc * rng.uniform(-1.0, 1.0)
        y = init.y + spread * rsc * rng.uniform(-1.0, 1.0)
        vx = init.xdot + spread * vsc * rng.uniform(-1.0, 1.0)
        vy = init.ydot + spread * vsc * rng.uniform(-1.0, 1.0)
        t = init.t + (rng.uniform(0.0, t_jitter) if t_jitter > 0.0 else 0.0)
        r2 = x * x + y * y
        if r2 < 1e-4:
            continue
        if m.A * x * x + 2.0 * m.B * x * y + m.C * y * y <= 1e-6:
            continue
        if couple and min(abs(x), abs(y)) < 0.05 * math.sqrt(r2):
            continue
        out.append(CartesianState(x, y, vx, vy, t))
    return out
