"""Named benchmark models used by the test suite and the example scenarios.

Every fixture is a point-symmetric model, so both invariants I and J exist:

    iso_ho   identity form, f = g = 0, rho = 1, U = s^2/2        (circular init)
    kepler   identity form, f = g = 0, rho = 1, U = -1/s
    hyperbolic  A = C = 0, B = 1 (kappa = -1), f = g = lambda,
             rho = 1, U = 5/s^2 + s^2/2
    gen_fg   identity form, f = lambda, g = 0, rho = 1, U = 1/s^2 + s^2/2
    tdho     identity form, f = g = 0, rho = sqrt(1+t^2), U = 2 s^2

hyperbolic and gen_fg carry an inverse-square core in U because their
kappa*I/R^2 term can turn attractive (kappa = -1 with I >= 0, and I down
to -1/2 with the canonical lower limit, respectively); the core keeps the
effective radial potential repulsive at the center so orbits never
collapse.  The hyperbolic couplings additionally wall the motion inside the
first quadrant.

Samplers draw initial states from regions where each model is regular
(inside the definite cone, away from guarded axes, bounded energy).
"""

import math
from dataclasses import dataclass

from .geometry import CartesianState
from .model import InverseSquareCoulomb, InverseSquareHarmonic, validate_model

FIXTURE_NAMES = ("iso_ho", "kepler", "hyperbolic", "gen_fg", "tdho")

# J = 1 circular and J = 1.25 oscillatory starts for the harmonic trap
ISO_HO_CIRCULAR_INIT = CartesianState(1.0, 0.0, 0.0, 1.0, 0.0)
ISO_HO_OSC_INIT = CartesianState(1.0, 0.0, math.sqrt(0.5), 1.0, 0.0)
KEPLER_CIRCULAR_INIT = CartesianState(1.0, 0.0, 0.0, 1.0, 0.0)
KEPLER_ECCENTRIC_INIT = CartesianState(1.0, 0.0, 0.0, 1.1, 0.0)


@dataclass
class Fixture:
    name: str
    model: object
    init: CartesianState

    def sample_states(self, n, rng, t_span=(0.0, 0.0)):
        """Seeded initial states inside the fixture's regular region."""
        sampler = _SAMPLERS[self.name]
        out = []
        while len(out) < n:
            t = rng.uniform(*t_span) if t_span[1] > t_span[0] else t_span[0]
            s = sampler(rng, t)
            if s is not None:
                out.append(s)
        return out


def _sample_iso_like(rng, t):
    phi = rng.uniform(0.0, 2.0 * math.pi)
    r = rng.uniform(0.7, 1.4)
    x, y = r * math.cos(phi), r * math.sin(phi)
    vx, vy = rng.uniform(-1.0, 1.0, 2)
    if abs(x * vy - y * vx) < 0.1:
        return None
    return CartesianState(x, y, vx, vy, t)


def _sample_kepler(rng, t):
    phi = rng.uniform(0.0, 2.0 * math.pi)
    r = rng.uniform(0.7, 1.4)
    x, y = r * math.cos(phi), r * math.sin(phi)
    speed = rng.uniform(0.4, 0.9) * math.sqrt(2.0 / r)
    psi = rng.uniform(0.0, 2.0 * math.pi)
    vx, vy = speed * math.cos(psi), speed * math.sin(psi)
    if abs(x * vy - y * vx) < 0.3:
        return None
    return CartesianState(x, y, vx, vy, t)


def _sample_hyperbolic(rng, t):
    x, y = rng.uniform(0.7, 1.4, 2)
    vx, vy = rng.uniform(-0.5, 0.5, 2)
    return CartesianState(x, y, vx, vy, t)


def _sample_gen_fg(rng, t):
    theta = rng.uniform(0.25, 0.75)
    r = rng.uniform(0.8, 1.3)
    x, y = r * math.cos(theta), r * math.sin(theta)
    vx, vy = rng.uniform(-0.8, 0.8, 2)
    if abs(x * vy - y * vx) < 0.1:
        return None
    return CartesianState(x, y, vx, vy, t)


_SAMPLERS = {
    "iso_ho": _sample_iso_like,
    "kepler": _sample_kepler,
    "hyperbolic": _sample_hyperbolic,
    "gen_fg": _sample_gen_fg,
    "tdho": _sample_iso_like,
}


def build_model(name):
    if name == "iso_ho":
        return validate_model(form=(1.0, 0.0, 1.0), rho="1", U="s^2/2")
    if name == "kepler":
        return validate_model(
            form=(1.0, 0.0, 1.0), rho="1", U=InverseSquareCoulomb(0.0, 1.0)
        )
    if name == "hyperbolic":
        return validate_model(
            form=(0.0, 1.0, 0.0),
            f="lambda",
            g="lambda",
            rho="1",
            U=InverseSquareHarmonic(5.0, 1.0),
        )
    if name == "gen_fg":
        return validate_model(
            form=(1.0, 0.0, 1.0),
            f="lambda",
            rho="1",
            U=InverseSquareHarmonic(1.0, 1.0),
        )
    if name == "tdho":
        return validate_model(form=(1.0, 0.0, 1.0), rho="sqrt(1+t^2)", U="2*s^2")
    raise KeyError(f"unknown fixture '{name}'")


_DEFAULT_INITS = {
    "iso_ho": ISO_HO_CIRCULAR_INIT,
    "kepler": KEPLER_CIRCULAR_INIT,
    "hyperbolic": CartesianState(1.0, 1.0, 0.2, -0.15, 0.0),
    "gen_fg": CartesianState(1.0, 0.5, 0.0, 1.0, 0.0),
    "tdho": CartesianState(1.0, 0.0, 0.0, 1.0, 0.0),
}


def get(name):
    """Fresh fixture instance (model memo tables start empty)."""
    return Fixture(name, build_model(name), _DEFAULT_INITS[name])
