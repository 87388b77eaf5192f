"""Opcode table for compiled expression programs.

A program is a flat postfix instruction stream: int32 pairs (op, arg).
CONST pushes consts[arg], VAR pushes vars[arg], everything else pops its
operands from the stack and pushes one result.  Both backends (Cython and
pure Python) interpret the identical format.
"""

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

UNARY_FN_OPS = {
    "sin": OP_SIN,
    "cos": OP_COS,
    "tan": OP_TAN,
    "exp": OP_EXP,
    "log": OP_LOG,
    "sqrt": OP_SQRT,
    "abs": OP_ABS,
    "atan": OP_ATAN,
    "sign": OP_SIGN,
}

BINARY_OPS = {"+": OP_ADD, "-": OP_SUB, "*": OP_MUL, "/": OP_DIV, "^": OP_POW}

# Stack slots reserved by both interpreters; the compiler rejects deeper programs.
MAX_STACK = 64


class KernelDomainError(Exception):
    """Raised by kernel backends; ip indexes the failing instruction pair."""

    def __init__(self, ip, reason, element=-1):
        self.ip = ip
        self.reason = reason
        self.element = element
        super().__init__(reason)
