"""Numerical laboratory for Lagrangian Ermakov systems.

Construct models from a quadratic form (A, B, C), coupling functions
f(lambda), g(lambda) and a potential (generic vbar(R, t) or the
point-symmetric family (rho(t), U(s))); integrate them with drift
monitoring; evaluate and verify the Ermakov invariant I, the Noether
invariant J and the Hamiltonian; check Noether symmetries and involution;
and solve by reduction to quadratures or by linearization.
"""

from ._kernel import BACKEND as KERNEL_BACKEND
from .dynamics import IntegratorConfig, Trajectory, drift_report, eom_rhs, integrate
from .geometry import CartesianState, PolarState, QuadraticForm, from_polar, to_polar
from .invariants import (
    ermakov_I_cart,
    ermakov_I_polar,
    hamiltonian,
    hamiltonian_canonical,
    noether_J,
)
from .model import (
    ErmakovModel,
    InverseSquareCoulomb,
    InverseSquareHarmonic,
    ModelSpec,
    UExpr,
    validate_model,
)

__version__ = "0.1.0"

__all__ = [
    "KERNEL_BACKEND",
    "__version__",
    "CartesianState",
    "PolarState",
    "QuadraticForm",
    "from_polar",
    "to_polar",
    "ErmakovModel",
    "ModelSpec",
    "UExpr",
    "InverseSquareCoulomb",
    "InverseSquareHarmonic",
    "validate_model",
    "ermakov_I_cart",
    "ermakov_I_polar",
    "noether_J",
    "hamiltonian",
    "hamiltonian_canonical",
    "IntegratorConfig",
    "Trajectory",
    "integrate",
    "eom_rhs",
    "drift_report",
]
