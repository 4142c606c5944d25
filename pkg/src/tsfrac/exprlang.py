"""A small arithmetic expression language for user-supplied functions.

Grammar (EBNF)::

    expr    = term { ("+" | "-") term } ;
    term    = unary { ("*" | "/") unary } ;
    unary   = "-" unary | power ;
    power   = atom [ "^" unary ] ;               (* right associative *)
    atom    = number | name | name "(" [ expr { "," expr } ] ")"
            | "(" expr ")" ;
    number  = digits [ "." digits ] [ ("e" | "E") [ "+" | "-" ] digits ]
            | "." digits [ exponent ] ;
    name    = "t" | "s" | "y" | function ;
    function= "sqrt" | "exp" | "ln" | "sin" | "cos" | "abs" | "pow" | "gamma" ;

``^`` binds tighter than unary minus, so ``-2^2`` is ``-4`` while
``2^-1`` is ``0.5``.  Evaluation is vectorized over numpy arrays.
"""

from __future__ import annotations

import math
import warnings
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from tsfrac.errors import (
    ArityMismatch,
    DomainError,
    ExprSyntaxError,
    UndeclaredVariable,
    UnknownIdentifier,
)

VARIABLES = ("t", "s", "y")

FUNCTIONS = {
    "sqrt": 1,
    "exp": 1,
    "ln": 1,
    "sin": 1,
    "cos": 1,
    "abs": 1,
    "pow": 2,
    "gamma": 1,
}


class NonFiniteWarning(RuntimeWarning):
    """Emitted when an expression evaluates to NaN or an infinity."""


# {{{ gamma function

# Lanczos approximation with g = 7, n = 9.
_LANCZOS_G = 7.0
_LANCZOS_COEF = np.array([
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
])


def _gamma_lanczos(x: np.ndarray) -> np.ndarray:
    # valid for x >= 0.5
    x = x - 1.0
    acc = np.full_like(x, _LANCZOS_COEF[0])
    for k in range(1, len(_LANCZOS_COEF)):
        acc = acc + _LANCZOS_COEF[k] / (x + k)
    tt = x + _LANCZOS_G + 0.5
    # split the power to delay overflow for large arguments
    half = tt ** ((x + 0.5) / 2)
    return math.sqrt(2 * math.pi) * half * (half * np.exp(-tt)) * acc


def gamma(x):
    """Gamma function via the Lanczos approximation.

    Arguments below 1/2 use the reflection formula
    ``Gamma(x) Gamma(1 - x) = pi / sin(pi x)``.  Poles at the non-positive
    integers raise :class:`DomainError`.
    """
    xa = np.asarray(x, dtype=float)
    if np.any((xa <= 0) & (xa == np.round(xa))):
        raise DomainError(f"gamma has a pole at non-positive integer {x!r}")
    out = np.empty_like(xa)
    big = xa >= 0.5
    out[big] = _gamma_lanczos(xa[big])
    small = ~big
    if np.any(small):
        xs = xa[small]
        out[small] = math.pi / (np.sin(math.pi * xs) * _gamma_lanczos(1.0 - xs))
    return float(out) if out.ndim == 0 else out


# }}}


# {{{ syntax tree


@dataclass(frozen=True)
class Constant:
    value: float


@dataclass(frozen=True)
class Variable:
    name: str


@dataclass(frozen=True)
class Unary:
    operand: "Node"
    op: str = "-"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    fn: str
    args: tuple["Node", ...]
    position: int = field(default=-1, compare=False)


Node = Union[Constant, Variable, Unary, Binary, Call]

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}


def pretty(node: Node) -> str:
    """Render ``node`` with the minimal parentheses that reparse to it."""
    return _pretty(node, 0)


def _pretty(node: Node, ctx: int) -> str:
    if isinstance(node, Constant):
        return repr(float(node.value))
    if isinstance(node, Variable):
        return node.name
    if isinstance(node, Call):
        return f"{node.fn}(" + ", ".join(_pretty(a, 0) for a in node.args) + ")"
    if isinstance(node, Unary):
        s = "-" + _pretty(node.operand, _PREC["neg"])
        return f"({s})" if ctx > _PREC["neg"] else s
    p = _PREC[node.op]
    if node.op == "^":
        # right associative: the base needs strictly tighter binding
        s = _pretty(node.left, p + 1) + "^" + _pretty(node.right, _PREC["neg"])
    else:
        s = _pretty(node.left, p) + node.op + _pretty(node.right, p + 1)
    return f"({s})" if ctx > p else s


def free_variables(node: Node) -> set[str]:
    if isinstance(node, Variable):
        return {node.name}
    if isinstance(node, Unary):
        return free_variables(node.operand)
    if isinstance(node, Binary):
        return free_variables(node.left) | free_variables(node.right)
    if isinstance(node, Call):
        return set().union(*(free_variables(a) for a in node.args)) if node.args else set()
    return set()


# }}}


# {{{ parser


def _tokenize(source: str) -> list[tuple[str, object, int]]:
    tokens: list[tuple[str, object, int]] = []
    i, n = 0, len(source)
    while i < n:
        c = source[i]
        if c.isspace():
            i += 1
            continue
        if c.isdigit() or (c == "." and i + 1 < n and source[i + 1].isdigit()):
            j = i
            while j < n and source[j].isdigit():
                j += 1
            if j < n and source[j] == ".":
                j += 1
                while j < n and source[j].isdigit():
                    j += 1
            if j < n and source[j] in "eE":
                k = j + 1
                if k < n and source[k] in "+-":
                    k += 1
                if k < n and source[k].isdigit():
                    while k < n and source[k].isdigit():
                        k += 1
                    j = k
            tokens.append(("num", float(source[i:j]), i))
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            tokens.append(("name", source[i:j], i))
            i = j
            continue
        if c in "+-*/^(),":
            tokens.append((c, c, i))
            i += 1
            continue
        raise ExprSyntaxError(i, f"unexpected character {c!r}", source)
    tokens.append(("end", None, n))
    return tokens


class _Parser:
    def __init__(self, source: str) -> None:
        self.source = source
        self.tokens = _tokenize(source)
        self.pos = 0

    def peek(self) -> tuple[str, object, int]:
        return self.tokens[self.pos]

    def advance(self) -> tuple[str, object, int]:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str) -> tuple[str, object, int]:
        tok = self.peek()
        if tok[0] != kind:
            what = "end of input" if tok[0] == "end" else repr(tok[1])
            raise ExprSyntaxError(tok[2], f"expected {kind!r}, found {what}", self.source)
        return self.advance()

    def parse(self) -> Node:
        node = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise ExprSyntaxError(tok[2], f"unexpected {tok[1]!r}", self.source)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek()[0] in ("+", "-"):
            op = self.advance()[0]
            node = Binary(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.peek()[0] in ("*", "/"):
            op = self.advance()[0]
            node = Binary(op, node, self.unary())
        return node

    def unary(self) -> Node:
        if self.peek()[0] == "-":
            self.advance()
            return Unary(self.unary())
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.peek()[0] == "^":
            self.advance()
            return Binary("^", base, self.unary())
        return base

    def atom(self) -> Node:
        kind, value, where = self.peek()
        if kind == "num":
            self.advance()
            return Constant(float(value))
        if kind == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        if kind == "name":
            self.advance()
            name = str(value)
            if self.peek()[0] == "(":
                self.advance()
                args: list[Node] = []
                if self.peek()[0] != ")":
                    args.append(self.expr())
                    while self.peek()[0] == ",":
                        self.advance()
                        args.append(self.expr())
                self.expect(")")
                if name not in FUNCTIONS:
                    raise UnknownIdentifier(f"unknown function {name!r} at position {where}")
                if len(args) != FUNCTIONS[name]:
                    raise ArityMismatch(
                        f"{name} takes {FUNCTIONS[name]} argument(s), "
                        f"got {len(args)} at position {where}"
                    )
                return Call(name, tuple(args), where)
            if name in FUNCTIONS:
                raise ExprSyntaxError(self.peek()[2], f"expected '(' after {name!r}", self.source)
            if name not in VARIABLES:
                raise UnknownIdentifier(f"unknown identifier {name!r} at position {where}")
            return Variable(name)
        what = "end of input" if kind == "end" else repr(value)
        raise ExprSyntaxError(where, f"unexpected {what}", self.source)


def parse(source: str, signature: Sequence[str] = ("t",)) -> ExprFn:
    """Parse ``source`` into a function of the variables in ``signature``.

    >>> parse("t^2", ["t"])(3.0)
    9.0
    """
    if not source or not source.strip():
        raise ExprSyntaxError(0, "empty expression", source)
    signature = tuple(signature)
    for v in signature:
        if v not in VARIABLES:
            raise UnknownIdentifier(f"signature variable {v!r} is not one of {VARIABLES}")
    ast = _Parser(source).parse()
    extra = free_variables(ast) - set(signature)
    if extra:
        raise UndeclaredVariable(
            f"variable(s) {sorted(extra)} not declared in signature {list(signature)}"
            f" of {source!r}"
        )
    return ExprFn(ast, signature, source)


# }}}


# {{{ evaluation


def _evaluate(node: Node, env: dict[str, np.ndarray]) -> np.ndarray:
    if isinstance(node, Constant):
        return np.asarray(node.value)
    if isinstance(node, Variable):
        return env[node.name]
    if isinstance(node, Unary):
        return -_evaluate(node.operand, env)
    if isinstance(node, Binary):
        a = _evaluate(node.left, env)
        b = _evaluate(node.right, env)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if node.op == "/":
            return a / b
        return np.power(a, b)

    args = [_evaluate(a, env) for a in node.args]
    fn = node.fn
    x = args[0]
    if fn == "sqrt":
        if np.any(x < 0):
            raise DomainError(f"sqrt of negative argument in {pretty(node)}", node)
        return np.sqrt(x)
    if fn == "ln":
        if np.any(x <= 0):
            raise DomainError(f"ln of non-positive argument in {pretty(node)}", node)
        return np.log(x)
    if fn == "exp":
        return np.exp(x)
    if fn == "sin":
        return np.sin(x)
    if fn == "cos":
        return np.cos(x)
    if fn == "abs":
        return np.abs(x)
    if fn == "pow":
        return np.power(x, args[1])
    try:
        return np.asarray(gamma(x))
    except DomainError as exc:
        raise DomainError(f"{exc.args[0]} in {pretty(node)}", node) from None


@dataclass(frozen=True)
class ExprFn:
    """A parsed expression bound to an ordered variable signature.

    Calling it with scalars returns a float; with arrays, an array of the
    broadcast shape.
    """

    ast: Node
    signature: tuple[str, ...]
    source: str = ""

    def __call__(self, *args):
        if len(args) != len(self.signature):
            raise ArityMismatch(
                f"expression {self.source or pretty(self.ast)!r} takes "
                f"{len(self.signature)} argument(s), got {len(args)}"
            )
        arrays = [np.asarray(a, dtype=float) for a in args]
        shape = np.broadcast_shapes(*(a.shape for a in arrays)) if arrays else ()
        env = dict(zip(self.signature, arrays))
        with np.errstate(all="ignore"):
            out = np.broadcast_to(_evaluate(self.ast, env), shape).astype(float)
        if not np.all(np.isfinite(out)):
            warnings.warn(
                f"non-finite value from {self.source or pretty(self.ast)!r}",
                NonFiniteWarning,
                stacklevel=2,
            )
        return float(out) if out.ndim == 0 else out

    def eval(self, args: Sequence[float]) -> float:
        return self(*args)

    def __str__(self) -> str:
        return self.source or pretty(self.ast)


# }}}
