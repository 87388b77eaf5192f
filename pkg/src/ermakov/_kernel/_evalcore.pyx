# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled interpreter for expression programs.

Same opcode stream and error semantics as evalcore_py: any operation that
would produce a non-finite IEEE value raises KernelDomainError instead of
propagating NaN/inf.
"""

from libc cimport math as cm

import numpy as np

from .opcodes import KernelDomainError

BACKEND_NAME = "compiled"

DEF STACK_SIZE = 64

cdef enum:
    OP_CONST = 0
    OP_VAR = 1
    OP_NEG = 2
    OP_ADD = 3
    OP_SUB = 4
    OP_MUL = 5
    OP_DIV = 6
    OP_POW = 7
    OP_SIN = 8
    OP_COS = 9
    OP_TAN = 10
    OP_EXP = 11
    OP_LOG = 12
    OP_SQRT = 13
    OP_ABS = 14
    OP_ATAN = 15
    OP_SIGN = 16

# error codes mapped to reason strings at the Python boundary
cdef enum:
    ERR_NONE = 0
    ERR_DIV_ZERO = 1
    ERR_POW_ZERO_NEG = 2
    ERR_POW_NEG_FRAC = 3
    ERR_LOG_DOMAIN = 4
    ERR_SQRT_DOMAIN = 5
    ERR_NONFINITE = 6

_REASONS = {
    ERR_DIV_ZERO: "division by zero",
    ERR_POW_ZERO_NEG: "zero raised to a negative power",
    ERR_POW_NEG_FRAC: "negative base with non-integer exponent",
    ERR_LOG_DOMAIN: "log of non-positive value",
    ERR_SQRT_DOMAIN: "sqrt of negative value",
    ERR_NONFINITE: "non-finite result",
}


cdef inline bint _is_integral(double y) nogil:
    return y == cm.floor(y) and cm.fabs(y) < 9.007199254740992e15


cdef int _run(const int[::1] code, const double[::1] consts,
              const double* varvals, double* stack, double* result,
              int* err_ip) nogil:
    cdef int n = code.shape[0] // 2
    cdef int ip, op, arg, sp = 0
    cdef double a, b, v
    for ip in range(n):
        op = code[2 * ip]
        arg = code[2 * ip + 1]
        if op == OP_CONST:
            stack[sp] = consts[arg]
            sp += 1
        elif op == OP_VAR:
            stack[sp] = varvals[arg]
            sp += 1
        elif op == OP_NEG:
            stack[sp - 1] = -stack[sp - 1]
        elif op == OP_ADD:
            sp -= 1
            stack[sp - 1] = stack[sp - 1] + stack[sp]
        elif op == OP_SUB:
            sp -= 1
            stack[sp - 1] = stack[sp - 1] - stack[sp]
        elif op == OP_MUL:
            sp -= 1
            stack[sp - 1] = stack[sp - 1] * stack[sp]
        elif op == OP_DIV:
            sp -= 1
            b = stack[sp]
            if b == 0.0:
                err_ip[0] = ip
                return ERR_DIV_ZERO
            stack[sp - 1] = stack[sp - 1] / b
        elif op == OP_POW:
            sp -= 1
            b = stack[sp]
            a = stack[sp - 1]
            if a == 0.0 and b < 0.0:
                err_ip[0] = ip
                return ERR_POW_ZERO_NEG
            if a < 0.0 and not _is_integral(b):
                err_ip[0] = ip
                return ERR_POW_NEG_FRAC
            stack[sp - 1] = cm.pow(a, b)
        elif op == OP_SIN:
            stack[sp - 1] = cm.sin(stack[sp - 1])
        elif op == OP_COS:
            stack[sp - 1] = cm.cos(stack[sp - 1])
        elif op == OP_TAN:
            stack[sp - 1] = cm.tan(stack[sp - 1])
        elif op == OP_EXP:
            stack[sp - 1] = cm.exp(stack[sp - 1])
        elif op == OP_LOG:
            if stack[sp - 1] <= 0.0:
                err_ip[0] = ip
                return ERR_LOG_DOMAIN
            stack[sp - 1] = cm.log(stack[sp - 1])
        elif op == OP_SQRT:
            if stack[sp - 1] < 0.0:
                err_ip[0] = ip
                return ERR_SQRT_DOMAIN
            stack[sp - 1] = cm.sqrt(stack[sp - 1])
        elif op == OP_ABS:
            stack[sp - 1] = cm.fabs(stack[sp - 1])
        elif op == OP_ATAN:
            stack[sp - 1] = cm.atan(stack[sp - 1])
        elif op == OP_SIGN:
            v = stack[sp - 1]
            stack[sp - 1] = 0.0 if v == 0.0 else cm.copysign(1.0, v)
        if not cm.isfinite(stack[sp - 1]):
            err_ip[0] = ip
            return ERR_NONFINITE
    result[0] = stack[0]
    return ERR_NONE


def eval_scalar(const int[::1] code, const double[::1] consts, varvals):
    """Evaluate a program at scalar variable values; returns a float."""
    cdef double[::1] vv = np.ascontiguousarray(varvals, dtype=np.float64)
    cdef double stack[STACK_SIZE]
    cdef double result = 0.0
    cdef int err_ip = -1
    cdef int status
    cdef const double* vp = &vv[0] if vv.shape[0] > 0 else NULL
    status = _run(code, consts, vp, stack, &result, &err_ip)
    if status != ERR_NONE:
        raise KernelDomainError(err_ip, _REASONS[status])
    return result


def eval_vector(const int[::1] code, const double[::1] consts,
                const double[::1] xs, double[::1] out):
    """Evaluate a single-variable program over the array xs into out."""
    cdef double stack[STACK_SIZE]
    cdef double result, x
    cdef int err_ip = -1
    cdef int status = ERR_NONE
    cdef Py_ssize_t i, n = xs.shape[0]
    cdef Py_ssize_t bad = -1
    with nogil:
        for i in range(n):
            x = xs[i]
            status = _run(code, consts, &x, stack, &result, &err_ip)
            if status != ERR_NONE:
                bad = i
                break
            out[i] = result
    if status != ERR_NONE:
        raise KernelDomainError(err_ip, _REASONS[status], bad)
    return np.asarray(out)


cdef double[15] GK15_NODES
cdef double[15] GK15_WEIGHTS
cdef double[15] G7_WEIGHTS_FULL

GK15_NODES[0] = -0.9914553711208126
GK15_NODES[1] = -0.9491079123427585
GK15_NODES[2] = -0.8648644233597691
GK15_NODES[3] = -0.7415311855993945
GK15_NODES[4] = -0.5860872354676911
GK15_NODES[5] = -0.4058451513773972
GK15_NODES[6] = -0.20778495500789848
GK15_NODES[7] = 0.0
GK15_NODES[8] = 0.20778495500789848
GK15_NODES[9] = 0.4058451513773972
GK15_NODES[10] = 0.5860872354676911
GK15_NODES[11] = 0.7415311855993945
GK15_NODES[12] = 0.8648644233597691
GK15_NODES[13] = 0.9491079123427585
GK15_NODES[14] = 0.9914553711208126

GK15_WEIGHTS[0] = 0.022935322010529224
GK15_WEIGHTS[1] = 0.06309209262997856
GK15_WEIGHTS[2] = 0.10479001032225019
GK15_WEIGHTS[3] = 0.14065325971552592
GK15_WEIGHTS[4] = 0.1690047266392679
GK15_WEIGHTS[5] = 0.19035057806478542
GK15_WEIGHTS[6] = 0.20443294007529889
GK15_WEIGHTS[7] = 0.20948214108472782
GK15_WEIGHTS[8] = 0.20443294007529889
GK15_WEIGHTS[9] = 0.19035057806478542
GK15_WEIGHTS[10] = 0.1690047266392679
GK15_WEIGHTS[11] = 0.14065325971552592
GK15_WEIGHTS[12] = 0.10479001032225019
GK15_WEIGHTS[13] = 0.06309209262997856
GK15_WEIGHTS[14] = 0.022935322010529224

G7_WEIGHTS_FULL[0] = 0.0
G7_WEIGHTS_FULL[1] = 0.1294849661688697
G7_WEIGHTS_FULL[2] = 0.0
G7_WEIGHTS_FULL[3] = 0.27970539148927664
G7_WEIGHTS_FULL[4] = 0.0
G7_WEIGHTS_FULL[5] = 0.3818300505051189
G7_WEIGHTS_FULL[6] = 0.0
G7_WEIGHTS_FULL[7] = 0.4179591836734694
G7_WEIGHTS_FULL[8] = 0.0
G7_WEIGHTS_FULL[9] = 0.3818300505051189
G7_WEIGHTS_FULL[10] = 0.0
G7_WEIGHTS_FULL[11] = 0.27970539148927664
G7_WEIGHTS_FULL[12] = 0.0
G7_WEIGHTS_FULL[13] = 0.1294849661688697
G7_WEIGHTS_FULL[14] = 0.0


def gk15(const int[::1] code, const double[::1] consts, double a, double b):
    """One Gauss-Kronrod 7/15 panel of a single-variable program over [a, b]."""
    cdef double stack[STACK_SIZE]
    cdef double mid = 0.5 * (a + b)
    cdef double half = 0.5 * (b - a)
    cdef double k = 0.0, g = 0.0, x, result
    cdef int err_ip = -1
    cdef int status = ERR_NONE
    cdef int i
    cdef Py_ssize_t bad = -1
    with nogil:
        for i in range(15):
            x = mid + half * GK15_NODES[i]
            status = _run(code, consts, &x, stack, &result, &err_ip)
            if status != ERR_NONE:
                bad = i
                break
            k += GK15_WEIGHTS[i] * result
            g += G7_WEIGHTS_FULL[i] * result
    if status != ERR_NONE:
        raise KernelDomainError(err_ip, _REASONS[status], bad)
    k *= half
    g *= half
    return k, cm.fabs(k - g)
