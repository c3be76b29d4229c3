"""Cost expressions over parameter-atom frequencies.

The expression language covers constants, frequency variables written
``f(atom)``, the four arithmetic operators, integer powers via ``^``,
``abs`` and ``sqrt``. Expressions are parsed into a small immutable AST
which supports evaluation, symbolic differentiation with constant folding,
and printing back to parseable text.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Mapping, Optional, Union

CostExpr = Union["Const", "Freq", "Add", "Sub", "Mul", "Div", "Pow", "Abs", "Sqrt"]


class CostParseError(ValueError):
    def __init__(self, message: str, pos: int = 0):
        super().__init__(message)
        self.pos = pos


class CostSingularityError(ArithmeticError):
    """Division by zero or sqrt of a negative value during evaluation."""

    def __init__(self, message: str, subexpr: str):
        super().__init__(f"{message} in {subexpr}")
        self.subexpr = subexpr


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Freq:
    atom: int


@dataclass(frozen=True)
class Add:
    left: CostExpr
    right: CostExpr


@dataclass(frozen=True)
class Sub:
    left: CostExpr
    right: CostExpr


@dataclass(frozen=True)
class Mul:
    left: CostExpr
    right: CostExpr


@dataclass(frozen=True)
class Div:
    left: CostExpr
    right: CostExpr


@dataclass(frozen=True)
class Pow:
    base: CostExpr
    exponent: int


@dataclass(frozen=True)
class Abs:
    arg: CostExpr


@dataclass(frozen=True)
class Sqrt:
    arg: CostExpr


def evaluate(expr: CostExpr, beta: Mapping[int, float]) -> float:
    if isinstance(expr, Const):
        return expr.value
    if isinstance(expr, Freq):
        return beta[expr.atom]
    if isinstance(expr, Add):
        return evaluate(expr.left, beta) + evaluate(expr.right, beta)
    if isinstance(expr, Sub):
        return evaluate(expr.left, beta) - evaluate(expr.right, beta)
    if isinstance(expr, Mul):
        return evaluate(expr.left, beta) * evaluate(expr.right, beta)
    if isinstance(expr, Div):
        denom = evaluate(expr.right, beta)
        if denom == 0.0:
            raise CostSingularityError("division by zero", to_text(expr))
        return evaluate(expr.left, beta) / denom
    if isinstance(expr, Pow):
        base = evaluate(expr.base, beta)
        if base == 0.0 and expr.exponent < 0:
            raise CostSingularityError("zero base with negative exponent", to_text(expr))
        return base ** expr.exponent
    if isinstance(expr, Abs):
        return abs(evaluate(expr.arg, beta))
    if isinstance(expr, Sqrt):
        arg = evaluate(expr.arg, beta)
        if arg < 0.0:
            raise CostSingularityError("sqrt of a negative value", to_text(expr))
        return math.sqrt(arg)
    raise TypeError(f"not a cost expression: {expr!r}")


def free_atoms(expr: CostExpr) -> set[int]:
    if isinstance(expr, Freq):
        return {expr.atom}
    if isinstance(expr, (Add, Sub, Mul, Div)):
        return free_atoms(expr.left) | free_atoms(expr.right)
    if isinstance(expr, Pow):
        return free_atoms(expr.base)
    if isinstance(expr, (Abs, Sqrt)):
        return free_atoms(expr.arg)
    return set()


def differentiate(expr: CostExpr, atom: int) -> CostExpr:
    """Symbolic partial derivative with respect to the frequency of `atom`."""
    if isinstance(expr, Const):
        return Const(0.0)
    if isinstance(expr, Freq):
        return Const(1.0 if expr.atom == atom else 0.0)
    if isinstance(expr, Add):
        return Add(differentiate(expr.left, atom), differentiate(expr.right, atom))
    if isinstance(expr, Sub):
        return Sub(differentiate(expr.left, atom), differentiate(expr.right, atom))
    if isinstance(expr, Mul):
        return Add(
            Mul(differentiate(expr.left, atom), expr.right),
            Mul(expr.left, differentiate(expr.right, atom)),
        )
    if isinstance(expr, Div):
        if isinstance(expr.right, Const):
            return Div(differentiate(expr.left, atom), expr.right)
        # (u/v)' = (u'v - uv') / v^2
        return Div(
            Sub(
                Mul(differentiate(expr.left, atom), expr.right),
                Mul(expr.left, differentiate(expr.right, atom)),
            ),
            Pow(expr.right, 2),
        )
    if isinstance(expr, Pow):
        if expr.exponent == 0:
            return Const(0.0)
        return Mul(
            Mul(Const(float(expr.exponent)), Pow(expr.base, expr.exponent - 1)),
            differentiate(expr.base, atom),
        )
    if isinstance(expr, Abs):
        # sign(x) * x'; the kink at zero is left to the subgradient sign(0)=0
        return Mul(Div(expr.arg, Abs(expr.arg)), differentiate(expr.arg, atom))
    if isinstance(expr, Sqrt):
        return Div(differentiate(expr.arg, atom), Mul(Const(2.0), Sqrt(expr.arg)))
    raise TypeError(f"not a cost expression: {expr!r}")


def simplify(expr: CostExpr) -> CostExpr:
    """Constant folding and neutral-element elimination, bottom-up."""
    if isinstance(expr, (Const, Freq)):
        return expr
    if isinstance(expr, Add):
        a, b = simplify(expr.left), simplify(expr.right)
        if isinstance(a, Const) and isinstance(b, Const):
            return Const(a.value + b.value)
        if isinstance(a, Const) and a.value == 0.0:
            return b
        if isinstance(b, Const) and b.value == 0.0:
            return a
        return Add(a, b)
    if isinstance(expr, Sub):
        a, b = simplify(expr.left), simplify(expr.right)
        if isinstance(a, Const) and isinstance(b, Const):
            return Const(a.value - b.value)
        if isinstance(b, Const) and b.value == 0.0:
            return a
        return Sub(a, b)
    if isinstance(expr, Mul):
        a, b = simplify(expr.left), simplify(expr.right)
        if isinstance(a, Const) and isinstance(b, Const):
            return Const(a.value * b.value)
        if (isinstance(a, Const) and a.value == 0.0) or (
            isinstance(b, Const) and b.value == 0.0
        ):
            return Const(0.0)
        if isinstance(a, Const) and a.value == 1.0:
            return b
        if isinstance(b, Const) and b.value == 1.0:
            return a
        # collapse nested constant factors so MSE partials fold to c*(x - w)
        if isinstance(a, Const) and isinstance(b, Mul) and isinstance(b.left, Const):
            return simplify(Mul(Const(a.value * b.left.value), b.right))
        if isinstance(b, Const) and isinstance(a, Mul) and isinstance(a.left, Const):
            return simplify(Mul(Const(b.value * a.left.value), a.right))
        if isinstance(b, Const):
            return Mul(b, a)
        return Mul(a, b)
    if isinstance(expr, Div):
        a, b = simplify(expr.left), simplify(expr.right)
        if isinstance(a, Const) and a.value == 0.0:
            return Const(0.0)
        if isinstance(b, Const) and b.value == 1.0:
            return a
        if isinstance(a, Const) and isinstance(b, Const) and b.value != 0.0:
            return Const(a.value / b.value)
        return Div(a, b)
    if isinstance(expr, Pow):
        base = simplify(expr.base)
        if expr.exponent == 0:
            return Const(1.0)
        if expr.exponent == 1:
            return base
        if isinstance(base, Const):
            return Const(base.value ** expr.exponent)
        return Pow(base, expr.exponent)
    if isinstance(expr, Abs):
        arg = simplify(expr.arg)
        if isinstance(arg, Const):
            return Const(abs(arg.value))
        return Abs(arg)
    if isinstance(expr, Sqrt):
        arg = simplify(expr.arg)
        if isinstance(arg, Const) and arg.value >= 0.0:
            return Const(math.sqrt(arg.value))
        return Sqrt(arg)
    raise TypeError(f"not a cost expression: {expr!r}")


def partial(expr: CostExpr, atom: int) -> CostExpr:
    return simplify(differentiate(expr, atom))


# --- printing ---------------------------------------------------------------

_PREC = {Add: 1, Sub: 1, Mul: 2, Div: 2, Pow: 3}


def _fmt_const(v: float) -> str:
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def to_text(expr: CostExpr, name_of: Optional[Callable[[int], str]] = None) -> str:
    def ref(atom: int) -> str:
        return name_of(atom) if name_of else str(atom)

    def walk(e: CostExpr, parent_prec: int, right_side: bool) -> str:
        if isinstance(e, Const):
            s = _fmt_const(e.value)
            if e.value < 0 and parent_prec > 0:
                s = f"({s})"
            return s
        if isinstance(e, Freq):
            return f"f({ref(e.atom)})"
        if isinstance(e, Abs):
            return f"abs({walk(e.arg, 0, False)})"
        if isinstance(e, Sqrt):
            return f"sqrt({walk(e.arg, 0, False)})"
        if isinstance(e, Pow):
            s = f"{walk(e.base, _PREC[Pow] + 1, False)}^{e.exponent}"
            prec = _PREC[Pow]
        else:
            op = {Add: "+", Sub: "-", Mul: "*", Div: "/"}[type(e)]
            prec = _PREC[type(e)]
            left = walk(e.left, prec, False)
            # same-precedence right operands need parens to keep left associativity
            right = walk(e.right, prec + 1, True)
            s = f"{left} {op} {right}"
        if prec < parent_prec:
            s = f"({s})"
        return s

    return walk(expr, 0, False)


# --- parsing ----------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+\.\d+|\d+)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[()^*/+,-]))"
)

_ATOM_REF_RE = re.compile(r"\s*([A-Za-z_][A-Za-z0-9_]*(?:\([^()]*\))?|\d+)\s*\)")


class _Parser:
    def __init__(self, text: str, resolver: Callable[[str], int]):
        self.text = text
        self.resolver = resolver
        self.pos = 0
        self.tok: Optional[str] = None
        self.kind: Optional[str] = None
        self._advance()

    def _advance(self) -> None:
        if not self.text[self.pos :].strip():
            self.tok, self.kind = None, None
            self.pos = len(self.text)
            return
        m = _TOKEN_RE.match(self.text, self.pos)
        if not m:
            raise CostParseError(
                f"unexpected character {self.text[self.pos]!r}", self.pos
            )
        self.pos = m.end()
        for kind in ("num", "ident", "op"):
            if m.group(kind) is not None:
                self.tok, self.kind = m.group(kind), kind
                return

    def _expect(self, tok: str) -> None:
        if self.tok != tok:
            raise CostParseError(f"expected {tok!r}, found {self.tok!r}", self.pos)
        self._advance()

    def parse(self) -> CostExpr:
        e = self.expr()
        if self.tok is not None:
            raise CostParseError(f"trailing input at {self.tok!r}", self.pos)
        return e

    def expr(self) -> CostExpr:
        e = self.term()
        while self.tok in ("+", "-"):
            op = self.tok
            self._advance()
            rhs = self.term()
            e = Add(e, rhs) if op == "+" else Sub(e, rhs)
        return e

    def term(self) -> CostExpr:
        e = self.power()
        while self.tok in ("*", "/"):
            op = self.tok
            self._advance()
            rhs = self.power()
            e = Mul(e, rhs) if op == "*" else Div(e, rhs)
        return e

    def power(self) -> CostExpr:
        e = self.unary()
        while self.tok == "^":
            self._advance()
            e = Pow(e, self._int_exponent())
        return e

    def _int_exponent(self) -> int:
        neg = False
        if self.tok == "-":
            neg = True
            self._advance()
        if self.kind != "num" or "." in (self.tok or ""):
            raise CostParseError("exponent must be an integer", self.pos)
        n = int(self.tok)
        self._advance()
        return -n if neg else n

    def unary(self) -> CostExpr:
        if self.tok == "-":
            self._advance()
            inner = self.unary()
            if isinstance(inner, Const):
                return Const(-inner.value)
            return Sub(Const(0.0), inner)
        return self.primary()

    def primary(self) -> CostExpr:
        if self.kind == "num":
            v = float(self.tok)
            self._advance()
            return Const(v)
        if self.tok == "(":
            self._advance()
            e = self.expr()
            self._expect(")")
            return e
        if self.kind == "ident":
            name = self.tok
            if name == "f":
                self._advance()
                if self.tok != "(":
                    raise CostParseError("expected '(' after f", self.pos)
                # atom references may themselves carry parenthesized arguments,
                # e.g. f(coin_out(1,heads)); scan them raw up to the closing
                # paren of f(...) instead of going through the tokenizer
                m = _ATOM_REF_RE.match(self.text, self.pos)
                if not m:
                    raise CostParseError("malformed atom reference in f(...)", self.pos)
                ref = re.sub(r"\s+", "", m.group(1))
                self.pos = m.end()
                self._advance()
                return Freq(self.resolver(ref))
            if name in ("sqrt", "abs"):
                self._advance()
                self._expect("(")
                arg = self.expr()
                self._expect(")")
                return Sqrt(arg) if name == "sqrt" else Abs(arg)
            raise CostParseError(f"unknown identifier {name!r}", self.pos)
        raise CostParseError(f"malformed expression at {self.tok!r}", self.pos)


def parse_cost_expr(text: str, resolver: Callable[[str], int]) -> CostExpr:
    """Parse a cost expression; `resolver` maps atom references to indices.

    The resolver receives the textual reference inside ``f(...)`` (an atom
    name or a variable number) and must raise CostParseError for unknown or
    undeclared references.
    """
    return _Parser(text, resolver).parse()


# --- cost specification -----------------------------------------------------


class CostSpec:
    """A cost expression plus ready-to-evaluate partial derivatives.

    Partials are produced by symbolic differentiation with constant folding,
    so each gradient evaluation is a handful of arithmetic operations. For
    costs synthesized from target weights, `use_closed_form` switches the
    gradient to the equivalent direct formula; it must produce bit-identical
    values (covered by tests), so it can only ever change speed, not results.
    """

    def __init__(
        self,
        expr: CostExpr,
        params: tuple[int, ...] | list[int],
        mse_weights: Optional[dict[int, float]] = None,
        use_closed_form: bool = False,
    ) -> None:
        self.expr = simplify(expr)
        self.params = tuple(params)
        referenced = free_atoms(self.expr)
        unknown = referenced - set(self.params)
        if unknown:
            raise ValueError(f"cost references non-parameter atoms: {sorted(unknown)}")
        self.mse_weights = dict(mse_weights) if mse_weights else None
        self.use_closed_form = bool(use_closed_form and self.mse_weights)
        self.partials: dict[int, CostExpr] = {
            p: partial(self.expr, p) for p in self.params
        }

    def evaluate(self, beta: Mapping[int, float]) -> float:
        return evaluate(self.expr, beta)

    def gradient(self, beta: Mapping[int, float]) -> dict[int, float]:
        if self.use_closed_form:
            assert self.mse_weights is not None
            n = len(self.mse_weights)
            grad = {}
            for p in self.params:
                w = self.mse_weights.get(p)
                g = 2.0 * (beta[p] - w) if w is not None else 0.0
                grad[p] = g / n if n > 1 else g
            return grad
        return {p: evaluate(self.partials[p], beta) for p in self.params}


def check_gradient(
    spec: CostSpec,
    points: int = 100,
    rng=None,
    h: float = 1e-6,
    tol: float = 1e-6,
    lo: float = 0.01,
    hi: float = 0.99,
) -> float:
    """Compare symbolic partials against central finite differences.

    Returns the worst mixed absolute/relative error over random interior
    points; raises AssertionError when it exceeds `tol`.
    """
    import random as _random

    rng = rng or _random.Random(0)
    worst = 0.0
    for _ in range(points):
        beta = {p: rng.uniform(lo, hi) for p in spec.params}
        grad = spec.gradient(beta)
        for p in spec.params:
            up = dict(beta)
            dn = dict(beta)
            up[p] += h
            dn[p] -= h
            fd = (spec.evaluate(up) - spec.evaluate(dn)) / (2 * h)
            err = abs(grad[p] - fd) / max(1.0, abs(grad[p]), abs(fd))
            worst = max(worst, err)
    if worst >= tol:
        raise AssertionError(f"gradient check failed: worst error {worst:g}")
    return worst
