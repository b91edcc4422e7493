"""Exact characteristic-class arithmetic on products of projective spaces.

Cohomology of ``P^{n_1} x ... x P^{n_m}`` is ``Q[h_1, ..., h_m] / (h_i^{n_i + 1})``.
Classes are kept as sparse dictionaries from exponent tuples to
:class:`fractions.Fraction` coefficients, so every number produced here is exact.

One level of projectivization ``Y = P(E*)`` is supported through
:class:`ProjBundleRing`, where ``xi = c_1(O_Y(1))`` satisfies

    xi^r + c_1(E*) xi^{r-1} + ... + c_r(E*) = 0,   c_i(E*) = (-1)^i c_i(E).
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Iterable, Mapping, Union

import numpy as np

Number = Union[int, Fraction]


class ClassRingError(ValueError):
    """Raised for unsupported bundle constructions or base mismatches."""


@dataclass(frozen=True)
class BasePresentation:
    """A product of projective spaces, ``factors = (n_1, ..., n_m)``."""

    factors: tuple[int, ...]

    def __post_init__(self):
        factors = tuple(int(n) for n in self.factors)
        if not factors:
            raise ClassRingError("a base needs at least one projective factor")
        if any(n < 1 for n in factors):
            raise ClassRingError(f"projective factors must have dimension >= 1, got {factors}")
        object.__setattr__(self, "factors", factors)

    @property
    def dim(self) -> int:
        return sum(self.factors)

    @property
    def ngens(self) -> int:
        return len(self.factors)

    @classmethod
    def parse(cls, text: str) -> "BasePresentation":
        """Parse ``"P2"``, ``"P1xP1"``, ``"P1xP2xP1"``."""
        parts = re.split(r"\s*[xX*]\s*", text.strip())
        factors = []
        for part in parts:
            m = re.fullmatch(r"P\^?(\d+)", part)
            if m is None:
                raise ClassRingError(f"cannot parse base {text!r}")
            factors.append(int(m.group(1)))
        return cls(tuple(factors))

    def __str__(self):
        return "x".join(f"P{n}" for n in self.factors)

    def generator_names(self) -> tuple[str, ...]:
        if self.ngens == 1:
            return ("h",)
        return tuple(f"h{i + 1}" for i in range(self.ngens))

    def monomials(self, degree: int) -> list[tuple[int, ...]]:
        """All surviving exponent tuples of the given total degree."""
        ranges = [range(n + 1) for n in self.factors]
        return [e for e in itertools.product(*ranges) if sum(e) == degree]

    def top_monomial(self) -> tuple[int, ...]:
        return self.factors


def _format_coeff(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _format_monomial(exps: Iterable[int], names: Iterable[str]) -> list[str]:
    return [name if e == 1 else f"{name}^{e}" for name, e in zip(names, exps) if e]


def _format_terms(items, names) -> str:
    if not items:
        return "0"
    out = ""
    for exps, c in items:
        sign = "-" if c < 0 else "+"
        c = abs(c)
        factors = _format_monomial(exps, names)
        if not factors:
            body = _format_coeff(c)
        elif c == 1:
            body = " * ".join(factors)
        else:
            body = " * ".join([_format_coeff(c)] + factors)
        if not out:
            out = body if sign == "+" else f"-{body}"
        else:
            out += f" {sign} {body}"
    return out


class GradedClass:
    """An element of the truncated cohomology ring of a :class:`BasePresentation`.

    Immutable.  Monomials exceeding ``h_i^{n_i}`` are dropped on construction and
    zero coefficients are never stored.
    """

    __slots__ = ("base", "_terms")

    def __init__(self, base: BasePresentation, terms: Mapping[tuple[int, ...], Number] | None = None):
        self.base = base
        clean = {}
        for exps, c in (terms or {}).items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != base.ngens:
                raise ClassRingError(f"exponent tuple {exps} does not match base {base}")
            if any(e < 0 for e in exps):
                raise ClassRingError(f"negative exponent in {exps}")
            if any(e > n for e, n in zip(exps, base.factors)):
                continue
            c = Fraction(c)
            if c:
                clean[exps] = clean.get(exps, Fraction(0)) + c
                if not clean[exps]:
                    del clean[exps]
        self._terms = clean

    # construction helpers
    @classmethod
    def zero(cls, base):
        return cls(base)

    @classmethod
    def scalar(cls, base, c: Number):
        return cls(base, {(0,) * base.ngens: c})

    @classmethod
    def one(cls, base):
        return cls.scalar(base, 1)

    @classmethod
    def gen(cls, base, i: int):
        exps = [0] * base.ngens
        exps[i] = 1
        return cls(base, {tuple(exps): 1})

    @classmethod
    def linear(cls, base, coeffs: Iterable[Number]):
        """``sum_i coeffs[i] * h_i``."""
        coeffs = list(coeffs)
        if len(coeffs) != base.ngens:
            raise ClassRingError(f"expected {base.ngens} coefficients for base {base}, got {len(coeffs)}")
        out = cls.zero(base)
        for i, c in enumerate(coeffs):
            out = out + cls.gen(base, i) * c
        return out

    @property
    def terms(self) -> dict[tuple[int, ...], Fraction]:
        return dict(self._terms)

    def _coerce(self, other) -> "GradedClass":
        if isinstance(other, GradedClass):
            if other.base != self.base:
                raise ClassRingError(f"base mismatch: {self.base} vs {other.base}")
            return other
        if isinstance(other, (int, Fraction)):
            return GradedClass.scalar(self.base, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        terms = dict(self._terms)
        for k, c in other._terms.items():
            terms[k] = terms.get(k, Fraction(0)) + c
        return GradedClass(self.base, terms)

    __radd__ = __add__

    def __neg__(self):
        return GradedClass(self.base, {k: -c for k, c in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        terms: dict[tuple[int, ...], Fraction] = {}
        caps = self.base.factors
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                if any(x > n for x, n in zip(e, caps)):
                    continue
                terms[e] = terms.get(e, Fraction(0)) + c1 * c2
        return GradedClass(self.base, terms)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ClassRingError("negative powers are not defined")
        out = GradedClass.one(self.base)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = GradedClass.scalar(self.base, other)
        if not isinstance(other, GradedClass):
            return NotImplemented
        return self.base == other.base and self._terms == other._terms

    def __hash__(self):
        return hash((self.base, frozenset(self._terms.items())))

    def __bool__(self):
        return bool(self._terms)

    def part(self, degree: int) -> "GradedClass":
        """Homogeneous component of the given degree."""
        return GradedClass(self.base, {k: c for k, c in self._terms.items() if sum(k) == degree})

    def truncate(self, max_degree: int) -> "GradedClass":
        return GradedClass(self.base, {k: c for k, c in self._terms.items() if sum(k) <= max_degree})

    def constant(self) -> Fraction:
        return self._terms.get((0,) * self.base.ngens, Fraction(0))

    def integrate(self) -> Fraction:
        return integrate(self)

    def sorted_items(self):
        return sorted(self._terms.items(), key=lambda kv: (sum(kv[0]), tuple(-e for e in kv[0])))

    def to_text(self) -> str:
        return _format_terms(self.sorted_items(), self.base.generator_names())

    def __repr__(self):
        return f"GradedClass({self.base}: {self.to_text()})"

    __str__ = to_text


def integrate(cls: GradedClass) -> Fraction:
    """Coefficient of the top monomial ``h_1^{n_1} ... h_m^{n_m}``."""
    return cls.terms.get(cls.base.top_monomial(), Fraction(0))


@dataclass(frozen=True)
class BundleClass:
    """Rank plus total Chern class of a (virtual-free) vector bundle."""

    rank: int
    total_chern: GradedClass

    def __post_init__(self):
        if self.rank < 1:
            raise ClassRingError("bundle rank must be positive")
        if self.total_chern.constant() != 1:
            raise ClassRingError("total Chern class must start with 1")
        for k in range(self.rank + 1, self.base.dim + 1):
            if self.total_chern.part(k):
                raise ClassRingError(f"c_{k} is nonzero for a rank {self.rank} bundle")

    @property
    def base(self) -> BasePresentation:
        return self.total_chern.base

    def c(self, k: int) -> GradedClass:
        if k < 0:
            return GradedClass.zero(self.base)
        return self.total_chern.part(k)

    def dual(self) -> "BundleClass":
        return BundleClass(self.rank, _alternate(self.total_chern))

    def __add__(self, other: "BundleClass") -> "BundleClass":
        if other.base != self.base:
            raise ClassRingError(f"base mismatch: {self.base} vs {other.base}")
        return BundleClass(self.rank + other.rank, self.total_chern * other.total_chern)

    def det(self) -> "BundleClass":
        return BundleClass(1, 1 + self.c(1))

    def twist(self, line: "BundleClass") -> "BundleClass":
        """``E (x) L`` for a line bundle ``L``."""
        if line.rank != 1:
            raise ClassRingError("tensor of two higher-rank bundles")
        if line.base != self.base:
            raise ClassRingError(f"base mismatch: {self.base} vs {line.base}")
        r = self.rank
        l1 = line.c(1)
        total = GradedClass.one(self.base)
        for k in range(1, min(r, self.base.dim) + 1):
            ck = GradedClass.zero(self.base)
            for i in range(k + 1):
                ck = ck + self.c(i) * (l1 ** (k - i)) * comb(r - i, k - i)
            total = total + ck
        return BundleClass(r, total)

    def segre(self) -> GradedClass:
        return segre_from_chern(self)


def _alternate(cls: GradedClass) -> GradedClass:
    return GradedClass(cls.base, {k: c * (-1) ** sum(k) for k, c in cls.terms.items()})


# bundle descriptors -------------------------------------------------------

@dataclass(frozen=True)
class Tangent:
    pass


@dataclass(frozen=True)
class Cotangent:
    pass


@dataclass(frozen=True)
class Line:
    degrees: tuple[int, ...]


@dataclass(frozen=True)
class DirectSum:
    parts: tuple


@dataclass(frozen=True)
class Dual:
    inner: object


@dataclass(frozen=True)
class Det:
    inner: object


@dataclass(frozen=True)
class Tensor:
    parts: tuple


def tangent_bundle(base: BasePresentation) -> BundleClass:
    """Euler sequence: ``c(T P^n) = (1 + h)^{n+1}`` on each factor."""
    total = GradedClass.one(base)
    for i, n in enumerate(base.factors):
        total = total * (1 + GradedClass.gen(base, i)) ** (n + 1)
    return BundleClass(base.dim, total)


def line_bundle(base: BasePresentation, degrees: Iterable[int]) -> BundleClass:
    degrees = tuple(int(d) for d in degrees)
    if len(degrees) != base.ngens:
        raise ClassRingError(f"O{degrees} does not match base {base} with {base.ngens} factor(s)")
    return BundleClass(1, 1 + GradedClass.linear(base, degrees))


def total_chern(descriptor, base: BasePresentation) -> BundleClass:
    """Evaluate a bundle descriptor to its rank and total Chern class."""
    if isinstance(descriptor, BundleClass):
        if descriptor.base != base:
            raise ClassRingError(f"bundle lives on {descriptor.base}, not {base}")
        return descriptor
    if isinstance(descriptor, Tangent):
        return tangent_bundle(base)
    if isinstance(descriptor, Cotangent):
        return tangent_bundle(base).dual()
    if isinstance(descriptor, Line):
        return line_bundle(base, descriptor.degrees)
    if isinstance(descriptor, Dual):
        return total_chern(descriptor.inner, base).dual()
    if isinstance(descriptor, Det):
        return total_chern(descriptor.inner, base).det()
    if isinstance(descriptor, DirectSum):
        parts = [total_chern(p, base) for p in descriptor.parts]
        out = parts[0]
        for p in parts[1:]:
            out = out + p
        return out
    if isinstance(descriptor, Tensor):
        parts = [total_chern(p, base) for p in descriptor.parts]
        out = parts[0]
        for p in parts[1:]:
            if out.rank == 1:
                out, p = p, out
            if p.rank != 1:
                raise ClassRingError("tensor of two higher-rank bundles")
            out = out.twist(p)
        return out
    raise ClassRingError(f"unknown bundle descriptor {descriptor!r}")


def segre_from_chern(bundle: BundleClass) -> GradedClass:
    """Total Segre class via ``s_k + s_{k-1} c_1 + ... + c_k = 0``."""
    base = bundle.base
    s = [GradedClass.one(base)]
    for k in range(1, base.dim + 1):
        sk = GradedClass.zero(base)
        for i in range(1, k + 1):
            sk = sk - bundle.c(i) * s[k - i]
        s.append(sk)
    out = GradedClass.zero(base)
    for sk in s:
        out = out + sk
    return out


@dataclass(frozen=True)
class SegreVerdict:
    value: Fraction
    big: bool

    @property
    def verdict(self) -> str:
        return "big" if self.big else "not-big"


def signed_segre_number(bundle: BundleClass) -> SegreVerdict:
    """``(-1)^n * int s_n(E)``; positive means big, *provided* ``E`` is nef.

    Nefness is not checked here.
    """
    n = bundle.base.dim
    value = (-1) ** n * integrate(segre_from_chern(bundle).part(n))
    return SegreVerdict(value, value > 0)


# projectivization ---------------------------------------------------------

def _relation_coefficients(bundle: BundleClass) -> list[GradedClass]:
    """``[c_1(E*), ..., c_r(E*)]`` for the relation satisfied by ``xi``."""
    return [(-1) ** i * bundle.c(i) for i in range(1, bundle.rank + 1)]


class ProjClass:
    """Element of ``H^*(P(E*))`` as ``sum_{k<r} coeffs[k] * xi^k``."""

    __slots__ = ("ring", "coeffs")

    def __init__(self, ring: "ProjBundleRing", coeffs: Iterable[GradedClass]):
        self.ring = ring
        self.coeffs = ring._reduce(list(coeffs))

    def _coerce(self, other):
        if isinstance(other, ProjClass):
            if other.ring is not self.ring and other.ring.bundle != self.ring.bundle:
                raise ClassRingError("classes live on different projective bundles")
            return other
        if isinstance(other, (int, Fraction, GradedClass)):
            return self.ring.pullback(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return ProjClass(self.ring, [a + b for a, b in zip(self.coeffs, other.coeffs)])

    __radd__ = __add__

    def __neg__(self):
        return ProjClass(self.ring, [-a for a in self.coeffs])

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        r = self.ring.rank
        prod = [GradedClass.zero(self.ring.base) for _ in range(2 * r - 1)]
        for i, a in enumerate(self.coeffs):
            if not a:
                continue
            for j, b in enumerate(other.coeffs):
                if b:
                    prod[i + j] = prod[i + j] + a * b
        return ProjClass(self.ring, prod)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = self.ring.one()
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(tuple(self.coeffs))

    def pushforward(self) -> GradedClass:
        return self.ring.pushforward(self)

    def integrate(self) -> Fraction:
        return integrate(self.ring.pushforward(self))

    def to_text(self) -> str:
        names = self.ring.base.generator_names() + ("xi",)
        items = []
        for k in range(self.ring.rank - 1, -1, -1):
            for exps, c in self.coeffs[k].sorted_items():
                items.append((exps + (k,), c))
        items.sort(key=lambda kv: (sum(kv[0]), tuple(-e for e in kv[0])))
        return _format_terms(items, names)

    def __repr__(self):
        return f"ProjClass({self.to_text()})"

    __str__ = to_text


class ProjBundleRing:
    """Cohomology ring of ``Y = P(E*)`` over the base of ``bundle``."""

    def __init__(self, bundle: BundleClass):
        self.bundle = bundle
        self.base = bundle.base
        self.rank = bundle.rank
        self.relation = _relation_coefficients(bundle)

    @property
    def dim(self) -> int:
        return self.base.dim + self.rank - 1

    def _reduce(self, coeffs: list[GradedClass]) -> list[GradedClass]:
        r = self.rank
        coeffs = [c if isinstance(c, GradedClass) else GradedClass.scalar(self.base, c) for c in coeffs]
        coeffs += [GradedClass.zero(self.base)] * max(0, r - len(coeffs))
        # xi^p = -sum_i c_i(E*) xi^{p-i} for p >= r
        for p in range(len(coeffs) - 1, r - 1, -1):
            top = coeffs[p]
            if top:
                for i, ci in enumerate(self.relation, start=1):
                    coeffs[p - i] = coeffs[p - i] - ci * top
        return coeffs[:r]

    def one(self) -> ProjClass:
        return ProjClass(self, [GradedClass.one(self.base)])

    def xi(self) -> ProjClass:
        # for rank 1 this reduces to pi^* c_1(E)
        return ProjClass(self, [GradedClass.zero(self.base), GradedClass.one(self.base)])

    def pullback(self, beta) -> ProjClass:
        if not isinstance(beta, GradedClass):
            beta = GradedClass.scalar(self.base, beta)
        if beta.base != self.base:
            raise ClassRingError(f"base mismatch: {self.base} vs {beta.base}")
        return ProjClass(self, [beta])

    def pushforward(self, cls: ProjClass) -> GradedClass:
        """Coefficient of ``xi^{r-1}``; lower xi-powers push forward to zero."""
        return cls.coeffs[self.rank - 1]

    def canonical_class(self) -> ProjClass:
        """``c_1(K_Y) = -r xi + pi^*(c_1(K_X) + c_1(E))``."""
        c1_kx = -tangent_bundle(self.base).c(1)
        return -self.rank * self.xi() + self.pullback(c1_kx + self.bundle.c(1))

    def integrate(self, cls: ProjClass) -> Fraction:
        return integrate(self.pushforward(cls))


def projectivize(bundle: BundleClass) -> ProjBundleRing:
    return ProjBundleRing(bundle)


# random data for property checks -------------------------------------------

def random_bundle(base: BasePresentation, rng: np.random.Generator, max_rank: int = 3,
                  coeff_range: int = 4) -> BundleClass:
    """Integer Chern data of random rank <= max_rank; not necessarily geometric."""
    rank = int(rng.integers(1, max_rank + 1))
    total = GradedClass.one(base)
    for k in range(1, min(rank, base.dim) + 1):
        terms = {m: int(rng.integers(-coeff_range, coeff_range + 1)) for m in base.monomials(k)}
        total = total + GradedClass(base, terms)
    return BundleClass(rank, total)
