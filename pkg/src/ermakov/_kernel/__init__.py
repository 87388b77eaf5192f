"""Kernel backend selection.

The compiled Cython kernel is preferred when it was built; the pure-Python
interpreter is a drop-in replacement.  Set ERMAKOV_PURE_PYTHON=1 to force
the fallback (used by the backend benchmark and the parity tests).
"""

import os

from .opcodes import MAX_STACK, KernelDomainError  # noqa: F401

if os.environ.get("ERMAKOV_PURE_PYTHON"):
    from . import evalcore_py as impl
else:
    try:
        from . import _evalcore as impl  # type: ignore[attr-defined]
    except ImportError:
        from . import evalcore_py as impl

BACKEND = impl.BACKEND_NAME

eval_scalar = impl.eval_scalar
eval_vector = impl.eval_vector
gk15 = impl.gk15
