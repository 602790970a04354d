"""Test functions: a small expression language, built-in families and P1 functions.

Expressions are parsed with a Pratt parser into an immutable tree and
evaluated with numpy, so every expression is vectorised::

    >>> e = parse_expr("sin(pi*x)")
    >>> float(e(0.5))
    1.0

Strings of the form ``family:name(args)`` select a built-in family instead
(``family:ueps(0.01)``, ``family:hat``, ``family:sinmode(3)``, ``family:bump``).
"""

from __future__ import annotations

import math
import re
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError, ExprSyntaxError, InvalidEpsilon, UnknownIdentifier
from .mesh import Interval, Mesh1D

__all__ = [
    "FunctionExpr",
    "Expr",
    "Family",
    "UEps",
    "P1Function",
    "Rescaled",
    "parse_expr",
    "eval_expr",
    "u_eps",
    "interpolate_p1",
    "random_sine_sum",
]

# --------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class Neg:
    arg: object


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple


CONSTANTS = {"pi": math.pi, "e": math.e}
FUNCTIONS = {
    "sin": 1, "cos": 1, "exp": 1, "log": 1, "sqrt": 1, "abs": 1,
    "min": 2, "max": 2,
}

_BINARY = {"+": (10, "left"), "-": (10, "left"), "*": (20, "left"), "/": (20, "left"), "^": (40, "right")}
_NEG_PREC = 30

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^(),]))"
)


def _tokenize(text: str):
    pos = 0
    tokens = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            raise ExprSyntaxError(f"unexpected character {text[pos:].lstrip()[:1]!r}", pos)
        start = m.start(m.lastgroup)
        tokens.append((m.lastgroup, m.group(m.lastgroup), start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, val, pos = self.next()
        if val != value:
            raise ExprSyntaxError(f"expected {value!r}, found {val or 'end of input'!r}", pos)

    def parse(self):
        node = self.expression(0)
        kind, val, pos = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected token {val!r}", pos)
        return node

    def expression(self, min_prec: int):
        left = self.prefix()
        while True:
            kind, val, pos = self.peek()
            if kind != "op" or val not in _BINARY:
                return left
            prec, assoc = _BINARY[val]
            if prec < min_prec:
                return left
            self.next()
            right = self.expression(prec + 1 if assoc == "left" else prec)
            left = BinOp(val, left, right)

    def prefix(self):
        kind, val, pos = self.next()
        if kind == "num":
            return Num(float(val))
        if kind == "op" and val == "-":
            return Neg(self.expression(_NEG_PREC))
        if kind == "op" and val == "+":
            return self.expression(_NEG_PREC)
        if kind == "op" and val == "(":
            node = self.expression(0)
            self.expect(")")
            return node
        if kind == "name":
            if val == "x":
                return Var()
            if val in CONSTANTS:
                return Const(val)
            if val in FUNCTIONS:
                self.expect("(")
                args = [self.expression(0)]
                while self.peek()[1] == ",":
                    self.next()
                    args.append(self.expression(0))
                self.expect(")")
                if len(args) != FUNCTIONS[val]:
                    raise ExprSyntaxError(f"{val} takes {FUNCTIONS[val]} argument(s), got {len(args)}", pos)
                return Call(val, tuple(args))
            raise UnknownIdentifier(val)
        raise ExprSyntaxError(f"unexpected {val or 'end of input'!r}", pos)


def _prec(node) -> int:
    if isinstance(node, BinOp):
        return _BINARY[node.op][0]
    if isinstance(node, Neg):
        return _NEG_PREC
    return 100


def _fmt(node) -> str:
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Var):
        return "x"
    if isinstance(node, Const):
        return node.name
    if isinstance(node, Call):
        return f"{node.name}({', '.join(_fmt(a) for a in node.args)})"
    if isinstance(node, Neg):
        inner = _fmt(node.arg)
        return f"-({inner})" if _prec(node.arg) < _NEG_PREC else f"-{inner}"
    prec, assoc = _BINARY[node.op]
    left, right = _fmt(node.left), _fmt(node.right)
    lp, rp = _prec(node.left), _prec(node.right)
    if lp < prec or (lp == prec and assoc == "right"):
        left = f"({left})"
    if rp < prec or (rp == prec and assoc == "left"):
        right = f"({right})"
    sep = "" if node.op == "^" else " "
    return f"{left}{sep}{node.op}{sep}{right}"


def _log(v):
    if np.any(v < 0):
        raise DomainError("log of a negative argument")
    with np.errstate(divide="ignore"):
        return np.log(v)


def _sqrt(v):
    if np.any(v < 0):
        raise DomainError("sqrt of a negative argument")
    return np.sqrt(v)


_UFUNCS: dict[str, Callable] = {
    "sin": np.sin, "cos": np.cos, "exp": np.exp, "log": _log, "sqrt": _sqrt, "abs": np.abs,
    "min": np.minimum, "max": np.maximum,
}


def _eval(node, x):
    if isinstance(node, Num):
        return np.full_like(x, node.value)
    if isinstance(node, Var):
        return x
    if isinstance(node, Const):
        return np.full_like(x, CONSTANTS[node.name])
    if isinstance(node, Neg):
        return -_eval(node.arg, x)
    if isinstance(node, Call):
        return _UFUNCS[node.name](*(_eval(a, x) for a in node.args))
    a, b = _eval(node.left, x), _eval(node.right, x)
    if node.op == "+":
        return a + b
    if node.op == "-":
        return a - b
    if node.op == "*":
        return a * b
    if node.op == "/":
        return a / b
    if np.any((a < 0) & (b != np.round(b))):
        raise DomainError("non-integer power of a negative base")
    return np.power(a, b)


# --------------------------------------------------------------------------
# Function objects


class FunctionExpr:
    """Something callable on numpy arrays, with known non-smooth points."""

    text: str = ""

    def __call__(self, x):
        raise NotImplementedError

    @property
    def breakpoints(self) -> tuple:
        return ()

    def on(self, domain: Interval) -> "FunctionExpr":
        """Bind family defaults to ``domain``; a no-op for plain expressions."""
        return self


@dataclass(frozen=True)
class Expr(FunctionExpr):
    ast: object
    text: str = field(default="", compare=False)

    def __call__(self, x):
        x_arr = np.asarray(x, dtype=float)
        scalar = x_arr.ndim == 0
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            out = _eval(self.ast, np.atleast_1d(x_arr))
        return float(out[0]) if scalar else out

    def pretty(self) -> str:
        return _fmt(self.ast)


@dataclass(frozen=True)
class Family(FunctionExpr):
    """Built-in generic test functions supported on ``interval``.

    ``hat``: ``min(x-a, b-x)``; ``bump``: ``((x-a)(b-x))^2`` scaled to peak 1;
    ``sinmode``: ``sin(k pi (x-a)/(b-a))``. All are zero outside ``[a, b]``.
    """

    name: str
    params: tuple = ()
    interval: Interval | None = None

    @property
    def text(self) -> str:
        args = list(self.params)
        if self.interval is not None:
            args += [self.interval.left, self.interval.right]
        return f"family:{self.name}" + (f"({','.join(repr(a) for a in args)})" if args else "")

    def on(self, domain: Interval) -> "Family":
        if self.interval is not None:
            return self
        return Family(self.name, self.params, domain)

    @property
    def breakpoints(self) -> tuple:
        if self.interval is None:
            return ()
        pts = [self.interval.left, self.interval.right]
        if self.name == "hat":
            pts.insert(1, self.interval.midpoint)
        return tuple(pts)

    def __call__(self, x):
        if self.interval is None:
            raise ValueError(f"family {self.name!r} needs an interval; call .on(domain) first")
        x_arr = np.asarray(x, dtype=float)
        a, b = self.interval.left, self.interval.right
        inside = (x_arr >= a) & (x_arr <= b)
        if self.name == "hat":
            val = np.minimum(x_arr - a, b - x_arr)
        elif self.name == "bump":
            val = ((x_arr - a) * (b - x_arr)) ** 2 / (0.5 * (b - a)) ** 4
        elif self.name == "sinmode":
            k = self.params[0]
            val = np.sin(k * np.pi * (x_arr - a) / (b - a))
        else:
            raise UnknownIdentifier(self.name)
        out = np.where(inside, val, 0.0)
        return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class UEps(FunctionExpr):
    """The counter-example profile ``u_eps`` on ``[-1, 1]`` (``epsilon = 0`` gives ``U``).

    Zero on ``[-1, eps)``; ``(-log r)^-1/2 - (-log eps)^-1/2`` on ``[eps, 1/2)``;
    linear ``(3 - 4r)`` ramp on ``[1/2, 3/4)``; zero on ``[3/4, 1]``.
    """

    epsilon: float

    @property
    def text(self) -> str:
        return f"family:ueps({self.epsilon!r})"

    @property
    def shift(self) -> float:
        return 0.0 if self.epsilon == 0 else (-math.log(self.epsilon)) ** -0.5

    @property
    def breakpoints(self) -> tuple:
        if self.epsilon == 0:
            return (0.0, 0.5, 0.75)
        return (0.0, self.epsilon, 0.5, 0.75)

    @property
    def support(self) -> Interval:
        return Interval(self.epsilon, 0.75)

    def __call__(self, r):
        r_arr = np.asarray(r, dtype=float)
        eps, c = self.epsilon, self.shift
        out = np.zeros_like(r_arr)
        log_part = (r_arr > 0) & (r_arr >= eps) & (r_arr < 0.5)
        rl = r_arr[log_part]
        out[log_part] = (-np.log(rl)) ** -0.5 - c
        ramp = (r_arr >= 0.5) & (r_arr < 0.75)
        out[ramp] = (3.0 - 4.0 * r_arr[ramp]) * (math.log(2.0) ** -0.5 - c)
        return float(out) if out.ndim == 0 else out

    def on(self, domain: Interval) -> "UEps":
        return self


@dataclass(frozen=True)
class Rescaled(FunctionExpr):
    """``x -> base(anchor + (x - anchor) / tau)``: ``base`` carried along ``x -> anchor + tau (x - anchor)``."""

    base: FunctionExpr
    tau: float
    anchor: float = 0.0

    def __call__(self, x):
        x_arr = np.asarray(x, dtype=float)
        return self.base(self.anchor + (x_arr - self.anchor) / self.tau)

    @property
    def breakpoints(self) -> tuple:
        return tuple(self.anchor + self.tau * (p - self.anchor) for p in self.base.breakpoints)


def u_eps(epsilon: float) -> UEps:
    if not 0.0 <= epsilon < 0.5:
        raise InvalidEpsilon(f"epsilon must lie in [0, 1/2), got {epsilon}")
    return UEps(float(epsilon))


_FAMILY_RE = re.compile(r"^family:(?P<name>[a-z_]+)(?:\((?P<args>[^)]*)\))?$")


def _parse_family(text: str) -> FunctionExpr:
    m = _FAMILY_RE.match(text.strip())
    if m is None:
        raise ExprSyntaxError(f"malformed family spec {text!r}", 0)
    name = m.group("name")
    args = [float(a) for a in m.group("args").split(",")] if m.group("args") else []
    if name == "ueps":
        if len(args) != 1:
            raise ExprSyntaxError("ueps takes exactly one argument", 0)
        return u_eps(args[0])
    if name in ("hat", "bump"):
        if len(args) not in (0, 2):
            raise ExprSyntaxError(f"{name} takes an optional interval (a, b)", 0)
        return Family(name, (), Interval(*args) if args else None)
    if name == "sinmode":
        if len(args) not in (1, 3):
            raise ExprSyntaxError("sinmode takes k and an optional interval (a, b)", 0)
        return Family(name, (int(args[0]),), Interval(*args[1:]) if len(args) == 3 else None)
    raise UnknownIdentifier(name)


def parse_expr(text: str) -> FunctionExpr:
    """Parse an expression in ``x`` or a ``family:`` spec."""
    if text.strip().startswith("family:"):
        return _parse_family(text)
    return Expr(_Parser(text).parse(), text)


def eval_expr(expr: FunctionExpr, x):
    """Evaluate ``expr`` at ``x``; overflow shows up as a non-finite value."""
    return expr(x)


# --------------------------------------------------------------------------
# P1 functions


@dataclass(frozen=True, eq=False)
class P1Function(FunctionExpr):
    """Continuous piecewise-linear function given by its nodal values."""

    mesh: Mesh1D
    values: np.ndarray
    boundary_clash: bool = False

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.shape != (self.mesh.n_nodes,):
            raise ValueError(f"expected {self.mesh.n_nodes} nodal values, got {vals.shape}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __call__(self, x):
        x_arr = np.asarray(x, dtype=float)
        out = np.interp(x_arr, self.mesh.nodes, self.values, left=0.0, right=0.0)
        return float(out) if out.ndim == 0 else out

    @property
    def breakpoints(self) -> tuple:
        return tuple(self.mesh.nodes)

    @property
    def is_dirichlet(self) -> bool:
        return self.values[0] == 0.0 and self.values[-1] == 0.0

    @property
    def interior(self) -> np.ndarray:
        return self.values[1:-1]

    @property
    def slopes(self) -> np.ndarray:
        return np.diff(self.values) / self.mesh.h

    def scaled(self, tau: float) -> "P1Function":
        """The function ``x -> u(left + (x - left)/tau)`` on the scaled mesh."""
        return P1Function(self.mesh.scaled(tau), self.values)


def interpolate_p1(expr: FunctionExpr | Callable, mesh: Mesh1D, dirichlet: bool = False) -> P1Function:
    """Nodal interpolant; with ``dirichlet`` the end values are forced to zero."""
    if isinstance(expr, FunctionExpr):
        expr = expr.on(mesh.domain)
    vals = np.array(expr(mesh.nodes), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise DomainError("expression is not finite at every mesh node")
    clash = False
    if dirichlet:
        clash = bool(abs(vals[0]) > 1e-12 or abs(vals[-1]) > 1e-12)
        if clash:
            warnings.warn("expression does not vanish at the boundary; end values set to zero", stacklevel=2)
        vals[0] = vals[-1] = 0.0
    return P1Function(mesh, vals, clash)


def random_sine_sum(rng: np.random.Generator, domain: Interval, max_modes: int = 8) -> Expr:
    """Seeded sum of at most ``max_modes`` sine modes with ``1/k^2``-decaying amplitudes."""
    n_modes = int(rng.integers(1, max_modes + 1))
    amps = rng.standard_normal(n_modes) / np.arange(1, n_modes + 1) ** 2
    a, tau = float(domain.left), float(domain.diameter)
    shift = f"x - {a!r}" if a >= 0 else f"x + {-a!r}"
    terms = [f"{float(amp)!r}*sin({k}*pi*({shift})/{tau!r})" for k, amp in enumerate(amps, start=1)]
    return parse_expr(" + ".join(terms))
