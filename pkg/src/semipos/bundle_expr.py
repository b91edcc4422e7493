"""A small query language for characteristic classes.

Grammar (whitespace-insensitive)::

    expr      := classexpr | 'integrate' '(' classexpr ')'
    classexpr := term (('+' | '-') term)*
    term      := factor ('*' factor)*
    factor    := classfn '(' bundle ')' | factor '^' int | '(' classexpr ')'
    classfn   := 'c' int? | 's' int?
    bundle    := bterm ('(+)' bterm)*
    bterm     := batom ('(x)' batom)*
    batom     := 'T' | 'T*' | 'O' '(' int (',' int)* ')'
               | 'det' '(' bundle ')' | 'dual' '(' bundle ')'

Bundle leaves reuse the descriptor classes of :mod:`semipos.class_ring`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .class_ring import (
    BasePresentation,
    ClassRingError,
    Cotangent,
    Det,
    DirectSum,
    Dual,
    GradedClass,
    Line,
    Tangent,
    Tensor,
    integrate,
    segre_from_chern,
    total_chern,
)


class ParseError(ValueError):
    def __init__(self, message: str, line: int, col: int, expected: frozenset[str] = frozenset()):
        self.message = message
        self.line = line
        self.col = col
        self.expected = expected
        detail = f" (expected one of: {', '.join(sorted(expected))})" if expected else ""
        super().__init__(f"{line}:{col}: {message}{detail}")


class EvaluationError(ValueError):
    """Semantic failure while evaluating a well-formed expression."""


# AST ---------------------------------------------------------------------

@dataclass(frozen=True)
class ClassFn:
    name: str  # 'c' or 's'
    degree: int | None
    bundle: object


@dataclass(frozen=True)
class Power:
    base: object
    exponent: int


@dataclass(frozen=True)
class Product:
    factors: tuple


@dataclass(frozen=True)
class ClassSum:
    # each entry is (sign, term) with sign in {+1, -1}; the first sign is +1
    terms: tuple


@dataclass(frozen=True)
class Integrate:
    inner: object


@dataclass(frozen=True)
class Expression:
    base: BasePresentation
    root: object


BundleAst = Union[Tangent, Cotangent, Line, DirectSum, Tensor, Dual, Det]


# lexer -------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<osum>\(\s*\+\s*\))
  | (?P<otimes>\(\s*x\s*\))
  | (?P<tstar>T\s*\*)
  | (?P<int>[+-]?\d+)
  | (?P<ident>[A-Za-z]+\d*)
  | (?P<punct>[()+\-*^,])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _position(text: str, offset: int) -> tuple[int, int]:
    line = text.count("\n", 0, offset) + 1
    col = offset - (text.rfind("\n", 0, offset) + 1) + 1
    return line, col


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos = 0
    prev_kind = None
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            line, col = _position(text, pos)
            raise ParseError(f"unknown token {text[pos]!r}", line, col)
        kind = m.lastgroup
        value = m.group()
        # a signed integer is only a literal where an int may start (after '(' , ',' or '^');
        # elsewhere '+'/'-' are operators
        if kind == "int" and value[0] in "+-" and prev_kind not in ("(", ",", "^"):
            kind, value = "punct", value[0]
            m_end = pos + 1
        else:
            m_end = m.end()
        if kind != "ws":
            line, col = _position(text, pos)
            if kind == "punct":
                toks.append(_Tok(value, value, line, col))
            elif kind == "osum":
                toks.append(_Tok("(+)", value, line, col))
            elif kind == "otimes":
                toks.append(_Tok("(x)", value, line, col))
            elif kind == "tstar":
                toks.append(_Tok("T*", value, line, col))
            else:
                toks.append(_Tok(kind, value, line, col))
            prev_kind = toks[-1].kind
        pos = m_end
    line, col = _position(text, len(text))
    toks.append(_Tok("eof", "", line, col))
    return toks


_CLASSFN_RE = re.compile(r"([cs])(\d*)")


class _Parser:
    def __init__(self, text: str, base: BasePresentation):
        self.toks = _tokenize(text)
        self.i = 0
        self.base = base

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def fail(self, expected: set[str], message: str | None = None):
        t = self.tok
        found = "end of input" if t.kind == "eof" else repr(t.text)
        raise ParseError(message or f"unexpected {found}", t.line, t.col, frozenset(expected))

    def accept(self, kind: str) -> _Tok | None:
        if self.tok.kind == kind:
            t = self.tok
            self.i += 1
            return t
        return None

    def expect(self, kind: str, expected: set[str] | None = None) -> _Tok:
        t = self.accept(kind)
        if t is None:
            self.fail(expected or {kind})
        return t

    def is_ident(self, name: str) -> bool:
        return self.tok.kind == "ident" and self.tok.text == name

    def parse(self):
        if self.is_ident("integrate"):
            self.i += 1
            self.expect("(")
            inner = self.classexpr()
            self.expect(")")
            root = Integrate(inner)
        else:
            root = self.classexpr()
        if self.tok.kind != "eof":
            self.fail({"+", "-", "*", "^", "end of input"})
        return root

    def classexpr(self):
        terms = [(1, self.term())]
        while self.tok.kind in ("+", "-"):
            sign = 1 if self.tok.kind == "+" else -1
            self.i += 1
            terms.append((sign, self.term()))
        return terms[0][1] if len(terms) == 1 else ClassSum(tuple(terms))

    def term(self):
        factors = [self.factor()]
        while self.accept("*"):
            factors.append(self.factor())
        return factors[0] if len(factors) == 1 else Product(tuple(factors))

    def factor(self):
        if self.accept("("):
            node = self.classexpr()
            self.expect(")")
        elif self.tok.kind == "ident" and _CLASSFN_RE.fullmatch(self.tok.text):
            m = _CLASSFN_RE.fullmatch(self.tok.text)
            self.i += 1
            degree = int(m.group(2)) if m.group(2) else None
            self.expect("(")
            node = ClassFn(m.group(1), degree, self.bundle())
            self.expect(")")
        else:
            self.fail({"c", "ck", "s", "sk", "("})
        while self.accept("^"):
            t = self.expect("int", {"integer"})
            e = int(t.text)
            if e < 0:
                raise ParseError("negative exponent", t.line, t.col, frozenset({"non-negative integer"}))
            node = Power(node, e)
        return node

    def bundle(self):
        parts = [self.bterm()]
        while self.accept("(+)"):
            parts.append(self.bterm())
        return parts[0] if len(parts) == 1 else DirectSum(tuple(parts))

    def bterm(self):
        parts = [self.batom()]
        while self.accept("(x)"):
            parts.append(self.batom())
        return parts[0] if len(parts) == 1 else Tensor(tuple(parts))

    def batom(self):
        expected = {"T", "T*", "O", "det", "dual"}
        if self.accept("T*"):
            return Cotangent()
        if self.is_ident("T"):
            self.i += 1
            return Tangent()
        if self.is_ident("O"):
            start = self.tok
            self.i += 1
            self.expect("(")
            degs = [int(self.expect("int", {"integer"}).text)]
            while self.accept(","):
                degs.append(int(self.expect("int", {"integer"}).text))
            self.expect(")", {",", ")"})
            if len(degs) != self.base.ngens:
                raise ParseError(
                    f"arity mismatch: O takes {self.base.ngens} degree(s) on {self.base}, got {len(degs)}",
                    start.line, start.col)
            return Line(tuple(degs))
        for name, cls in (("det", Det), ("dual", Dual)):
            if self.is_ident(name):
                self.i += 1
                self.expect("(")
                inner = self.bundle()
                self.expect(")")
                return cls(inner)
        self.fail(expected)


def parse(text: str, base: BasePresentation) -> Expression:
    """Parse ``text`` against a declared base; raises :class:`ParseError`."""
    if not isinstance(text, str):
        raise ParseError("expression must be a string", 1, 1)
    return Expression(base, _Parser(text, base).parse())


# evaluation --------------------------------------------------------------

def _eval_class(node, base: BasePresentation) -> GradedClass:
    if isinstance(node, ClassFn):
        try:
            bundle = total_chern(node.bundle, base)
        except ClassRingError as exc:
            raise EvaluationError(str(exc)) from exc
        total = bundle.total_chern if node.name == "c" else segre_from_chern(bundle)
        return total if node.degree is None else total.part(node.degree)
    if isinstance(node, Power):
        return _eval_class(node.base, base) ** node.exponent
    if isinstance(node, Product):
        out = GradedClass.one(base)
        for f in node.factors:
            out = out * _eval_class(f, base)
        return out
    if isinstance(node, ClassSum):
        out = GradedClass.zero(base)
        for sign, t in node.terms:
            out = out + sign * _eval_class(t, base)
        return out
    raise EvaluationError(f"not a class expression: {node!r}")


def evaluate(expr: Expression) -> GradedClass | Fraction:
    root = expr.root
    if isinstance(root, Integrate):
        return integrate(_eval_class(root.inner, expr.base))
    return _eval_class(root, expr.base)


def run_query(text: str, base: BasePresentation | str) -> GradedClass | Fraction:
    if isinstance(base, str):
        base = BasePresentation.parse(base)
    return evaluate(parse(text, base))


# printing ----------------------------------------------------------------

def _fmt_bundle(node) -> str:
    if isinstance(node, Tangent):
        return "T"
    if isinstance(node, Cotangent):
        return "T*"
    if isinstance(node, Line):
        return "O(" + ",".join(str(d) for d in node.degrees) + ")"
    if isinstance(node, Det):
        return f"det({_fmt_bundle(node.inner)})"
    if isinstance(node, Dual):
        return f"dual({_fmt_bundle(node.inner)})"
    if isinstance(node, Tensor):
        return " (x) ".join(_fmt_bundle(p) for p in node.parts)
    if isinstance(node, DirectSum):
        return " (+) ".join(_fmt_bundle(p) for p in node.parts)
    raise TypeError(f"not a bundle node: {node!r}")


def _fmt_class(node, ctx: str = "sum") -> str:
    if isinstance(node, ClassFn):
        deg = "" if node.degree is None else str(node.degree)
        return f"{node.name}{deg}({_fmt_bundle(node.bundle)})"
    if isinstance(node, Power):
        return f"{_fmt_class(node.base, 'power')}^{node.exponent}"
    if isinstance(node, Product):
        s = " * ".join(_fmt_class(f, "product") for f in node.factors)
        return f"({s})" if ctx in ("power", "product") else s
    if isinstance(node, ClassSum):
        s = _fmt_class(node.terms[0][1], "sum-term")
        for sign, t in node.terms[1:]:
            s += (" + " if sign > 0 else " - ") + _fmt_class(t, "sum-term")
        return s if ctx == "sum" else f"({s})"
    raise TypeError(f"not a class node: {node!r}")


def pretty(expr: Expression) -> str:
    root = expr.root
    if isinstance(root, Integrate):
        return f"integrate({_fmt_class(root.inner)})"
    return _fmt_class(root)
