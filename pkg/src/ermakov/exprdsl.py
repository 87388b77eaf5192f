"""Expression DSL: parsing, evaluation, exact differentiation, antiderivatives.

The grammar is conventional infix arithmetic:

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?          # right-associative
    atom   := NUMBER | NAME '(' args ')' | NAME | '(' expr ')'

with the call set {sin, cos, tan, exp, log, sqrt, abs, atan} plus the
internal 'sign' (produced by differentiating abs, with sign(0) = 0) and the
constants pi and e.  Variables must belong to the declared allowed set.

Nodes are immutable; smart constructors perform constant folding (and the
usual 0/1 identities) but no further simplification.  Differentiation is
structural and exact.  Antiderivatives are evaluated by adaptive
Gauss-Kronrod quadrature from a fixed reference lower limit and memoized on
the refinement grid, so nearby repeated queries cost a single panel.
"""

import math
import threading
from bisect import bisect_left, insort
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _kernel
from ._kernel.opcodes import (
    BINARY_OPS,
    MAX_STACK,
    OP_CONST,
    OP_NEG,
    OP_VAR,
    UNARY_FN_OPS,
    KernelDomainError,
)
from .errors import ArityError, EvalDomainError, ParseError, UnknownIdentifier
from .quadrature import adaptive_quadrature

FUNCTIONS = ("sin", "cos", "tan", "exp", "log", "sqrt", "abs", "atan", "sign")
CONSTANTS = {"pi": math.pi, "e": math.e}


class _ExprOps:
    """Arithmetic sugar so symmetry generators can be assembled as ASTs."""

    def __add__(self, other):
        return add(self, _coerce(other))

    def __radd__(self, other):
        return add(_coerce(other), self)

    def __sub__(self, other):
        return sub(self, _coerce(other))

    def __rsub__(self, other):
        return sub(_coerce(other), self)

    def __mul__(self, other):
        return mul(self, _coerce(other))

    def __rmul__(self, other):
        return mul(_coerce(other), self)

    def __truediv__(self, other):
        return div(self, _coerce(other))

    def __rtruediv__(self, other):
        return div(_coerce(other), self)

    def __pow__(self, other):
        return powr(self, _coerce(other))

    def __neg__(self):
        return neg(self)


@dataclass(frozen=True)
class Num(_ExprOps):
    value: float


@dataclass(frozen=True)
class Var(_ExprOps):
    name: str


@dataclass(frozen=True)
class Neg(_ExprOps):
    arg: "Expr"


@dataclass(frozen=True)
class BinOp(_ExprOps):
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call(_ExprOps):
    fn: str
    arg: "Expr"


Expr = Num | Var | Neg | BinOp | Call

ZERO = Num(0.0)
ONE = Num(1.0)


def _coerce(v):
    if isinstance(v, (Num, Var, Neg, BinOp, Call)):
        return v
    return Num(float(v))


def is_zero(e):
    return isinstance(e, Num) and e.value == 0.0


def _is_num(e, v):
    return isinstance(e, Num) and e.value == v


# ---------------------------------------------------------------------------
# smart constructors (constant folding only)


def add(a, b):
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value + b.value)
    if is_zero(a):
        return b
    if is_zero(b):
        return a
    return BinOp("+", a, b)


def sub(a, b):
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value - b.value)
    if is_zero(b):
        return a
    if is_zero(a):
        return neg(b)
    return BinOp("-", a, b)


def mul(a, b):
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value * b.value)
    if is_zero(a) or is_zero(b):
        return ZERO
    if _is_num(a, 1.0):
        return b
    if _is_num(b, 1.0):
        return a
    return BinOp("*", a, b)


def div(a, b):
    if isinstance(a, Num) and isinstance(b, Num) and b.value != 0.0:
        v = a.value / b.value
        if math.isfinite(v):
            return Num(v)
    if is_zero(a) and not is_zero(b):
        return ZERO
    if _is_num(b, 1.0):
        return a
    return BinOp("/", a, b)


def powr(a, b):
    if isinstance(a, Num) and isinstance(b, Num):
        base, exp = a.value, b.value
        ok = not (base == 0.0 and exp < 0.0)
        if base < 0.0 and exp != math.floor(exp):
            ok = False
        if ok:
            try:
                v = math.pow(base, exp)
            except (OverflowError, ValueError):
                v = math.inf
            if math.isfinite(v):
                return Num(v)
    if _is_num(b, 1.0):
        return a
    if is_zero(b):
        return ONE
    return BinOp("^", a, b)


def neg(a):
    if isinstance(a, Num):
        return Num(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def call(fn, a):
    if isinstance(a, Num):
        v = _apply_fn(fn, a.value)
        if v is not None:
            return Num(v)
    return Call(fn, a)


def _apply_fn(fn, x):
    try:
        if fn == "sin":
            v = math.sin(x)
        elif fn == "cos":
            v = math.cos(x)
        elif fn == "tan":
            v = math.tan(x)
        elif fn == "exp":
            v = math.exp(x)
        elif fn == "log":
            v = math.log(x) if x > 0 else None
        elif fn == "sqrt":
            v = math.sqrt(x) if x >= 0 else None
        elif fn == "abs":
            v = abs(x)
        elif fn == "atan":
            v = math.atan(x)
        elif fn == "sign":
            v = 0.0 if x == 0.0 else math.copysign(1.0, x)
        else:
            return None
    except (OverflowError, ValueError):
        return None
    if v is None or not math.isfinite(v):
        return None
    return v


# ---------------------------------------------------------------------------
# parsing


class _Tokenizer:
    def __init__(self, text):
        self.text = text
        self.pos = 0
        self.tokens = []
        self._run()

    def _run(self):
        text = self.text
        n = len(text)
        i = 0
        while i < n:
            c = text[i]
            if c.isspace():
                i += 1
                continue
            if c in "+-*/^(),":
                self.tokens.append((c, c, i))
                i += 1
                continue
            if c.isdigit() or (c == "." and i + 1 < n and text[i + 1].isdigit()):
                j = i
                while j < n and (text[j].isdigit() or text[j] == "."):
                    j += 1
                if j < n and text[j] in "eE":
                    k = j + 1
                    if k < n and text[k] in "+-":
                        k += 1
                    if k < n and text[k].isdigit():
                        j = k
                        while j < n and text[j].isdigit():
                            j += 1
                try:
                    value = float(text[i:j])
                except ValueError:
                    raise ParseError(f"malformed number '{text[i:j]}'", i) from None
                self.tokens.append(("num", value, i))
                i = j
                continue
            if c.isalpha() or c == "_":
                j = i
                while j < n and (text[j].isalnum() or text[j] == "_"):
                    j += 1
                self.tokens.append(("name", text[i:j], i))
                i = j
                continue
            raise ParseError(f"unexpected character '{c}'", i)
        self.tokens.append(("end", None, n))


class _Parser:
    def __init__(self, text, allowed_vars):
        self.text = text
        self.allowed = frozenset(allowed_vars)
        self.tokens = _Tokenizer(text).tokens
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind):
        tok = self.advance()
        if tok[0] != kind:
            raise ParseError(f"expected '{kind}', found '{tok[1]}'", tok[2])
        return tok

    def parse(self):
        e = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise ParseError(f"unexpected trailing input '{tok[1]}'", tok[2])
        return e

    def expr(self):
        e = self.term()
        while self.peek()[0] in ("+", "-"):
            op = self.advance()[0]
            rhs = self.term()
            e = add(e, rhs) if op == "+" else sub(e, rhs)
        return e

    def term(self):
        e = self.unary()
        while self.peek()[0] in ("*", "/"):
            op = self.advance()[0]
            rhs = self.unary()
            e = mul(e, rhs) if op == "*" else div(e, rhs)
        return e

    def unary(self):
        if self.peek()[0] == "-":
            self.advance()
            return neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[0] == "^":
            self.advance()
            return powr(base, self.unary())
        return base

    def atom(self):
        kind, value, pos = self.advance()
        if kind == "num":
            return Num(value)
        if kind == "(":
            e = self.expr()
            tok = self.advance()
            if tok[0] != ")":
                raise ParseError("expected ')'", tok[2])
            return e
        if kind == "name":
            if self.peek()[0] == "(":
                self.advance()
                args = [self.expr()]
                while self.peek()[0] == ",":
                    self.advance()
                    args.append(self.expr())
                tok = self.advance()
                if tok[0] != ")":
                    raise ParseError("expected ')'", tok[2])
                if value not in FUNCTIONS:
                    raise UnknownIdentifier(f"unknown function '{value}'", pos)
                if len(args) != 1:
                    raise ArityError(
                        f"{value} expects 1 argument, got {len(args)}", pos
                    )
                return call(value, args[0])
            if value in CONSTANTS:
                return Num(CONSTANTS[value])
            if value in self.allowed:
                return Var(value)
            raise UnknownIdentifier(f"unknown identifier '{value}'", pos)
        raise ParseError(f"expected a value, found '{value}'", pos)


def parse_expr(text, allowed_vars):
    """Parse text against an allowed-variable set; returns a folded AST."""
    if not isinstance(text, str) or not text.strip():
        raise ParseError("empty expression", 0)
    reserved = set(allowed_vars) & (set(FUNCTIONS) | set(CONSTANTS))
    if reserved:
        raise ValueError(f"allowed variables shadow reserved names: {sorted(reserved)}")
    return _Parser(text, allowed_vars).parse()


# ---------------------------------------------------------------------------
# printing

_PREC_ADD = 1
_PREC_MUL = 2
_PREC_NEG = 3
_PREC_POW = 4
_PREC_ATOM = 5


def _prec(e):
    if isinstance(e, BinOp):
        if e.op in ("+", "-"):
            return _PREC_ADD
        if e.op in ("*", "/"):
            return _PREC_MUL
        return _PREC_POW
    if isinstance(e, Neg):
        return _PREC_NEG
    if isinstance(e, Num) and e.value < 0:
        return _PREC_NEG
    return _PREC_ATOM


def pretty(e):
    """Render an AST; parse_expr(pretty(e)) reproduces e structurally."""
    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Call):
        return f"{e.fn}({pretty(e.arg)})"
    if isinstance(e, Neg):
        inner = pretty(e.arg)
        if _prec(e.arg) < _PREC_POW:
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(e, BinOp):
        lhs, rhs = pretty(e.left), pretty(e.right)
        if e.op in ("+", "-"):
            if _prec(e.right) <= _PREC_ADD:
                rhs = f"({rhs})"
            return f"{lhs} {e.op} {rhs}"
        if e.op in ("*", "/"):
            if _prec(e.left) < _PREC_MUL:
                lhs = f"({lhs})"
            if _prec(e.right) <= _PREC_MUL or (
                e.op == "/" and _prec(e.right) == _PREC_NEG
            ):
                rhs = f"({rhs})"
            return f"{lhs}{e.op}{rhs}"
        # power: right-associative, binds tighter than unary minus
        if _prec(e.left) <= _PREC_POW:
            lhs = f"({lhs})"
        if _prec(e.right) < _PREC_NEG:
            rhs = f"({rhs})"
        return f"{lhs}^{rhs}"
    raise TypeError(f"not an expression node: {e!r}")


# ---------------------------------------------------------------------------
# differentiation


def diff_expr(e, var):
    """Exact structural derivative d(e)/d(var); result is a folded AST."""
    if isinstance(e, Num):
        return ZERO
    if isinstance(e, Var):
        return ONE if e.name == var else ZERO
    if isinstance(e, Neg):
        return neg(diff_expr(e.arg, var))
    if isinstance(e, BinOp):
        u, v = e.left, e.right
        du, dv = diff_expr(u, var), diff_expr(v, var)
        if e.op == "+":
            return add(du, dv)
        if e.op == "-":
            return sub(du, dv)
        if e.op == "*":
            return add(mul(du, v), mul(u, dv))
        if e.op == "/":
            return div(sub(mul(du, v), mul(u, dv)), powr(v, Num(2.0)))
        # power
        if isinstance(v, Num):
            return mul(mul(v, powr(u, Num(v.value - 1.0))), du)
        return mul(e, add(mul(dv, call("log", u)), mul(v, div(du, u))))
    if isinstance(e, Call):
        u = e.arg
        du = diff_expr(u, var)
        if e.fn == "sin":
            outer = call("cos", u)
        elif e.fn == "cos":
            outer = neg(call("sin", u))
        elif e.fn == "tan":
            outer = add(ONE, powr(call("tan", u), Num(2.0)))
        elif e.fn == "exp":
            outer = call("exp", u)
        elif e.fn == "log":
            outer = div(ONE, u)
        elif e.fn == "sqrt":
            outer = div(ONE, mul(Num(2.0), call("sqrt", u)))
        elif e.fn == "abs":
            outer = call("sign", u)
        elif e.fn == "atan":
            outer = div(ONE, add(ONE, powr(u, Num(2.0))))
        elif e.fn == "sign":
            return ZERO
        else:
            raise ValueError(f"cannot differentiate call '{e.fn}'")
        return mul(outer, du)
    raise TypeError(f"not an expression node: {e!r}")


def free_vars(e):
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, Neg):
        return free_vars(e.arg)
    if isinstance(e, BinOp):
        return free_vars(e.left) | free_vars(e.right)
    if isinstance(e, Call):
        return free_vars(e.arg)
    return set()


# ---------------------------------------------------------------------------
# compilation and evaluation


class Program:
    """A compiled expression over an ordered variable tuple."""

    __slots__ = ("code", "consts", "varnames", "nodes", "expr")

    def __init__(self, expr, varnames):
        code = []
        consts = []
        nodes = []
        depth = 0
        max_depth = 0

        binary_codes = frozenset(BINARY_OPS.values())

        def emit(op, arg, node):
            nonlocal depth, max_depth
            code.extend((op, arg))
            nodes.append(node)
            if op in (OP_CONST, OP_VAR):
                depth += 1
            elif op in binary_codes:
                depth -= 1
            max_depth = max(max_depth, depth)

        index = {name: k for k, name in enumerate(varnames)}

        def walk(node):
            if isinstance(node, Num):
                consts.append(node.value)
                emit(OP_CONST, len(consts) - 1, node)
            elif isinstance(node, Var):
                if node.name not in index:
                    raise ValueError(f"unbound variable '{node.name}'")
                emit(OP_VAR, index[node.name], node)
            elif isinstance(node, Neg):
                walk(node.arg)
                emit(OP_NEG, 0, node)
            elif isinstance(node, BinOp):
                walk(node.left)
                walk(node.right)
                emit(BINARY_OPS[node.op], 0, node)
            elif isinstance(node, Call):
                walk(node.arg)
                emit(UNARY_FN_OPS[node.fn], 0, node)
            else:
                raise TypeError(f"not an expression node: {node!r}")

        walk(expr)
        if max_depth > MAX_STACK:
            raise ValueError(f"expression too deep (stack {max_depth})")
        self.code = np.asarray(code, dtype=np.int32)
        self.consts = np.asarray(consts, dtype=np.float64)
        self.varnames = tuple(varnames)
        self.nodes = nodes
        self.expr = expr

    def _domain_error(self, exc):
        node = self.nodes[exc.ip]
        return EvalDomainError(exc.reason, pretty(node))

    def __call__(self, *vals):
        try:
            return _kernel.eval_scalar(
                self.code, self.consts, np.asarray(vals, dtype=np.float64)
            )
        except KernelDomainError as exc:
            raise self._domain_error(exc) from None

    def eval_many(self, xs):
        """Vectorized single-variable evaluation."""
        if len(self.varnames) != 1:
            raise ValueError("eval_many requires a single-variable program")
        xs = np.ascontiguousarray(xs, dtype=np.float64)
        out = np.empty_like(xs)
        try:
            _kernel.eval_vector(self.code, self.consts, xs, out)
        except KernelDomainError as exc:
            raise self._domain_error(exc) from None
        return out

    def gk15_panel(self, a, b):
        """Fused Gauss-Kronrod panel for single-variable programs."""
        try:
            return _kernel.gk15(self.code, self.consts, a, b)
        except KernelDomainError as exc:
            raise self._domain_error(exc) from None


@lru_cache(maxsize=512)
def _compiled(expr, varnames):
    return Program(expr, varnames)


def compile_expr(expr, varnames):
    return _compiled(expr, tuple(varnames))


def eval_expr(e, bindings):
    """Evaluate an AST with a {name: value} binding map."""
    names = tuple(sorted(bindings))
    prog = compile_expr(e, names)
    return prog(*(bindings[n] for n in names))


# ---------------------------------------------------------------------------
# antiderivatives

# Queries closer than this to an existing knot do not grow the memo table.
_KNOT_MIN_GAP = 1e-6


@lru_cache(maxsize=128)
def _antiderivative_cached(expr, var, lower):
    return Antiderivative(expr, var, lower)


def antiderivative(integrand, lower, u, var="lambda"):
    """One-shot F(u) = integral of the expression from the lower limit.

    Repeated calls share the memoized Antiderivative instance, so nearby
    queries stay cheap.
    """
    return _antiderivative_cached(integrand, var, float(lower))(u)


class Antiderivative:
    """F(u) = integral of a one-variable expression from a fixed lower limit.

    Accepted panel boundaries are memoized, so the amortized cost of a
    query near previously visited territory is a single K15 panel.  The
    memo is guarded by a lock; concurrent queries return values within the
    quadrature tolerance of the single-threaded result.
    """

    def __init__(self, integrand, var, lower, abs_tol=1e-12, rel_tol=1e-12):
        self.integrand = integrand
        self.var = var
        self.lower = float(lower)
        self.abs_tol = abs_tol
        self.rel_tol = rel_tol
        self._prog = compile_expr(integrand, (var,))
        self._knots = [(self.lower, 0.0)]
        self._lock = threading.Lock()

    def derivative(self):
        """dF/du is the integrand itself."""
        return self.integrand

    def integrand_at(self, u):
        return self._prog(u)

    def __call__(self, u):
        u = float(u)
        with self._lock:
            knots = self._knots
            i = bisect_left(knots, (u, -math.inf))
            if i < len(knots) and knots[i][0] == u:
                return knots[i][1]
            # nearest existing knot on either side
            best = None
            for j in (i - 1, i):
                if 0 <= j < len(knots):
                    if best is None or abs(knots[j][0] - u) < abs(best[0] - u):
                        best = knots[j]
            x0, f0 = best
            value, boundaries = adaptive_quadrature(
                self._prog.gk15_panel, x0, u, self.abs_tol, self.rel_tol
            )
            for x, cum in boundaries[1:]:
                pos = bisect_left(knots, (x, -math.inf))
                crowded = any(
                    0 <= j < len(knots) and abs(knots[j][0] - x) < _KNOT_MIN_GAP
                    for j in (pos - 1, pos)
                )
                if not crowded:
                    insort(knots, (x, f0 + cum))
            return f0 + value
