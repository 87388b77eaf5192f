"""Pure-Python interpreter for expression programs.

Semantics mirror the Cython backend exactly: every operation that would
produce a non-finite IEEE value raises KernelDomainError instead of letting
NaN/inf propagate.  Scalar evaluation loops over instructions with a list
stack; vector evaluation interprets the same program over numpy arrays.
"""

import math

import numpy as np

from .opcodes import (
    OP_ABS,
    OP_ADD,
    OP_ATAN,
    OP_CONST,
    OP_COS,
    OP_DIV,
    OP_EXP,
    OP_LOG,
    OP_MUL,
    OP_NEG,
    OP_POW,
    OP_SIGN,
    OP_SIN,
    OP_SQRT,
    OP_SUB,
    OP_TAN,
    OP_VAR,
    KernelDomainError,
)

BACKEND_NAME = "python"

_GK15_NODES = np.array(
    [
        -0.9914553711208126,
        -0.9491079123427585,
        -0.8648644233597691,
        -0.7415311855993945,
        -0.5860872354676911,
        -0.4058451513773972,
        -0.20778495500789848,
        0.0,
        0.20778495500789848,
        0.4058451513773972,
        0.5860872354676911,
        0.7415311855993945,
        0.8648644233597691,
        0.9491079123427585,
        0.9914553711208126,
    ]
)
_GK15_WEIGHTS = np.array(
    [
        0.022935322010529224,
        0.06309209262997856,
        0.10479001032225019,
        0.14065325971552592,
        0.1690047266392679,
        0.19035057806478542,
        0.20443294007529889,
        0.20948214108472782,
        0.20443294007529889,
        0.19035057806478542,
        0.1690047266392679,
        0.14065325971552592,
        0.10479001032225019,
        0.06309209262997856,
        0.022935322010529224,
    ]
)
_G7_WEIGHTS = np.array(
    [
        0.1294849661688697,
        0.27970539148927664,
        0.3818300505051189,
        0.4179591836734694,
        0.3818300505051189,
        0.27970539148927664,
        0.1294849661688697,
    ]
)
_G7_INDEX = np.array([1, 3, 5, 7, 9, 11, 13])


def _is_integral(y):
    return y == math.floor(y) and abs(y) < 9.007199254740992e15


def eval_scalar(code, consts, varvals):
    """Evaluate a program at scalar variable values; returns a float."""
    stack = []
    push = stack.append
    n = len(code) // 2
    for ip in range(n):
        op = code[2 * ip]
        arg = code[2 * ip + 1]
        if op == OP_CONST:
            push(consts[arg])
        elif op == OP_VAR:
            push(varvals[arg])
        elif op == OP_NEG:
            stack[-1] = -stack[-1]
        elif op == OP_ADD:
            b = stack.pop()
            stack[-1] = stack[-1] + b
        elif op == OP_SUB:
            b = stack.pop()
            stack[-1] = stack[-1] - b
        elif op == OP_MUL:
            b = stack.pop()
            stack[-1] = stack[-1] * b
        elif op == OP_DIV:
            b = stack.pop()
            if b == 0.0:
                raise KernelDomainError(ip, "division by zero")
            stack[-1] = stack[-1] / b
        elif op == OP_POW:
            b = stack.pop()
            a = stack[-1]
            if a == 0.0 and b < 0.0:
                raise KernelDomainError(ip, "zero raised to a negative power")
            if a < 0.0 and not _is_integral(b):
                raise KernelDomainError(ip, "negative base with non-integer exponent")
            try:
                v = math.pow(a, b)
            except (OverflowError, ValueError):
                raise KernelDomainError(ip, "overflow in power") from None
            stack[-1] = v
        elif op == OP_SIN:
            stack[-1] = math.sin(stack[-1])
        elif op == OP_COS:
            stack[-1] = math.cos(stack[-1])
        elif op == OP_TAN:
            stack[-1] = math.tan(stack[-1])
        elif op == OP_EXP:
            try:
                stack[-1] = math.exp(stack[-1])
            except OverflowError:
                raise KernelDomainError(ip, "overflow in exp") from None
        elif op == OP_LOG:
            if stack[-1] <= 0.0:
                raise KernelDomainError(ip, "log of non-positive value")
            stack[-1] = math.log(stack[-1])
        elif op == OP_SQRT:
            if stack[-1] < 0.0:
                raise KernelDomainError(ip, "sqrt of negative value")
            stack[-1] = math.sqrt(stack[-1])
        elif op == OP_ABS:
            stack[-1] = abs(stack[-1])
        elif op == OP_ATAN:
            stack[-1] = math.atan(stack[-1])
        elif op == OP_SIGN:
            v = stack[-1]
            stack[-1] = 0.0 if v == 0.0 else math.copysign(1.0, v)
        if not math.isfinite(stack[-1]):
            raise KernelDomainError(ip, "non-finite result")
    return stack[0]


def eval_vector(code, consts, xs, out):
    """Evaluate a single-variable program over the array xs into out."""
    xs = np.asarray(xs, dtype=np.float64)
    stack = []
    push = stack.append
    n = len(code) // 2
    with np.errstate(all="ignore"):
        for ip in range(n):
            op = code[2 * ip]
            arg = code[2 * ip + 1]
            if op == OP_CONST:
                push(np.full_like(xs, consts[arg]))
            elif op == OP_VAR:
                push(xs.copy())
            elif op == OP_NEG:
                stack[-1] = -stack[-1]
            elif op == OP_ADD:
                b = stack.pop()
                stack[-1] = stack[-1] + b
            elif op == OP_SUB:
                b = stack.pop()
                stack[-1] = stack[-1] - b
            elif op == OP_MUL:
                b = stack.pop()
                stack[-1] = stack[-1] * b
            elif op == OP_DIV:
                b = stack.pop()
                bad = b == 0.0
                if bad.any():
                    raise KernelDomainError(
                        ip, "division by zero", int(np.argmax(bad))
                    )
                stack[-1] = stack[-1] / b
            elif op == OP_POW:
                b = stack.pop()
                a = stack[-1]
                bad = (a == 0.0) & (b < 0.0)
                if bad.any():
                    raise KernelDomainError(
                        ip, "zero raised to a negative power", int(np.argmax(bad))
                    )
                bad = (a < 0.0) & (b != np.floor(b))
                if bad.any():
                    raise KernelDomainError(
                        ip,
                        "negative base with non-integer exponent",
                        int(np.argmax(bad)),
                    )
                stack[-1] = np.power(a, b)
            elif op == OP_SIN:
                stack[-1] = np.sin(stack[-1])
            elif op == OP_COS:
                stack[-1] = np.cos(stack[-1])
            elif op == OP_TAN:
                stack[-1] = np.tan(stack[-1])
            elif op == OP_EXP:
                stack[-1] = np.exp(stack[-1])
            elif op == OP_LOG:
                bad = stack[-1] <= 0.0
                if bad.any():
                    raise KernelDomainError(
                        ip, "log of non-positive value", int(np.argmax(bad))
                    )
                stack[-1] = np.log(stack[-1])
            elif op == OP_SQRT:
                bad = stack[-1] < 0.0
                if bad.any():
                    raise KernelDomainError(
                        ip, "sqrt of negative value", int(np.argmax(bad))
                    )
                stack[-1] = np.sqrt(stack[-1])
            elif op == OP_ABS:
                stack[-1] = np.abs(stack[-1])
            elif op == OP_ATAN:
                stack[-1] = np.arctan(stack[-1])
            elif op == OP_SIGN:
                stack[-1] = np.sign(stack[-1])
            bad = ~np.isfinite(stack[-1])
            if bad.any():
                raise KernelDomainError(ip, "non-finite result", int(np.argmax(bad)))
    out[:] = stack[0]
    return out


def gk15(code, consts, a, b):
    """One Gauss-Kronrod 7/15 panel of a single-variable program over [a, b].

    Returns (kronrod_value, error_estimate) with the error taken as the
    plain |K15 - G7| difference.
    """
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    xs = mid + half * _GK15_NODES
    fs = np.empty(15)
    eval_vector(code, consts, xs, fs)
    k = half * float(_GK15_WEIGHTS @ fs)
    g = half * float(_G7_WEIGHTS @ fs[_G7_INDEX])
    return k, abs(k - g)
