"""Torus knots, their Alexander polynomials, semigroups, stretch and pinch moves."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Mapping

from gamma4.arith import continued_fraction, mod_inverse
from gamma4.errors import InternalError, NotAKnot, ValidationError


@dataclass(frozen=True, eq=False)
class TorusKnot:
    """T(p, q) with gcd(p, q) = 1, kept in input order.

    Equality and hashing ignore the order of (p, q) and identify every
    presentation of the unknot, since T(p, q) = T(q, p) and T(1, q) = T(0, 1).
    """

    p: int
    q: int

    @property
    def is_unknot(self) -> bool:
        return min(self.p, self.q) <= 1

    @property
    def key(self) -> tuple[int, int]:
        if self.is_unknot:
            return (1, 1)
        return (min(self.p, self.q), max(self.p, self.q))

    def __eq__(self, other):
        if not isinstance(other, TorusKnot):
            return NotImplemented
        return self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def swapped(self) -> TorusKnot:
        return TorusKnot(self.q, self.p)

    def even_first(self) -> TorusKnot:
        """Same knot, reordered so that an even parameter (if any) comes first."""
        if self.p % 2 == 1 and self.q % 2 == 0:
            return self.swapped()
        return self

    def __str__(self):
        return f"T({self.p},{self.q})"


def new_torus_knot(p: int, q: int) -> TorusKnot:
    if not isinstance(p, int) or not isinstance(q, int):
        raise ValidationError("torus knot parameters must be integers")
    if p < 0 or q < 0:
        raise ValidationError(f"torus knot parameters must be nonnegative, got ({p}, {q})")
    if math.gcd(p, q) != 1:
        raise NotAKnot(f"T({p},{q}) is not a knot: {p} and {q} are not coprime")
    return TorusKnot(p, q)


UNKNOT = TorusKnot(1, 1)


@dataclass(frozen=True)
class LaurentPoly:
    """Sparse integer Laurent polynomial; ``terms`` is sorted by exponent."""

    terms: tuple[tuple[int, int], ...]

    @classmethod
    def from_dict(cls, coeffs: Mapping[int, int]) -> LaurentPoly:
        return cls(tuple(sorted((e, c) for e, c in coeffs.items() if c != 0)))

    def as_dict(self) -> dict[int, int]:
        return dict(self.terms)

    def coeff(self, i: int) -> int:
        return self.as_dict().get(i, 0)

    @property
    def degree(self) -> int:
        if not self.terms:
            return 0
        return max(abs(self.terms[0][0]), abs(self.terms[-1][0]))

    def is_symmetric(self) -> bool:
        d = self.as_dict()
        return all(d.get(-e, 0) == c for e, c in d.items())

    def __call__(self, t):
        t = Fraction(t)
        return sum(c * t**e for e, c in self.terms)

    def __str__(self):
        if not self.terms:
            return "0"
        out = []
        for e, c in self.terms:
            mono = "1" if e == 0 else ("t" if e == 1 else f"t^{e}")
            body = mono if abs(c) == 1 and e != 0 else f"{abs(c)}" + ("" if e == 0 else "*" + mono)
            out.append(("- " if c < 0 else "+ ") + body)
        s = " ".join(out)
        return s[2:] if s.startswith("+ ") else "-" + s[1:]


@dataclass(frozen=True)
class Semigroup:
    """The numerical semigroup generated by p and q, stored through its gaps."""

    generators: tuple[int, int]
    gaps: tuple[int, ...]

    @property
    def frobenius(self) -> int:
        return self.gaps[-1] if self.gaps else -1

    def __contains__(self, x: int) -> bool:
        if x < 0:
            return False
        if x > self.frobenius:
            return True
        return _member(x, *self.generators)

    def members_below(self, bound: int) -> list[int]:
        return [x for x in range(bound) if x in self]


def _member(x: int, p: int, q: int) -> bool:
    if x < 0:
        return False
    if p == 1 or q == 1:
        return True
    # x = a p + b q has a solution with b >= 0 minimal, b = x q^-1 mod p
    b = x * pow(q, -1, p) % p
    return x - b * q >= 0


def genus(K: TorusKnot) -> int:
    if K.is_unknot:
        return 0
    return (K.p - 1) * (K.q - 1) // 2


def determinant(K: TorusKnot) -> int:
    if K.is_unknot:
        return 1
    if K.p % 2 == 0:
        return K.q
    if K.q % 2 == 0:
        return K.p
    return 1


def semigroup(K: TorusKnot) -> Semigroup:
    if K.is_unknot:
        return Semigroup((1, 1), ())
    p, q = K.key
    frob = p * q - p - q
    return Semigroup((p, q), tuple(x for x in range(frob + 1) if not _member(x, p, q)))


def _poly_mul(a: list[int], b: list[int]) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _poly_divexact(num: list[int], den: list[int]) -> list[int]:
    num = list(num)
    dq = len(den) - 1
    lead = den[-1]
    quot = [0] * (len(num) - dq)
    for i in range(len(quot) - 1, -1, -1):
        c, r = divmod(num[i + dq], lead)
        if r:
            raise InternalError("polynomial division is not exact")
        quot[i] = c
        if c:
            for j, d in enumerate(den):
                num[i + j] -= c * d
    if any(num[:dq]):
        raise InternalError("polynomial division left a remainder")
    return quot


def _binomial_minus_one(n: int) -> list[int]:
    c = [0] * (n + 1)
    c[0], c[n] = -1, 1
    return c


def alexander_by_division(K: TorusKnot) -> LaurentPoly:
    """(t-1)(t^pq - 1) / ((t^p - 1)(t^q - 1)), recentred to be symmetric."""
    if K.is_unknot:
        return LaurentPoly(((0, 1),))
    p, q = K.p, K.q
    num = _poly_mul(_binomial_minus_one(1), _binomial_minus_one(p * q))
    den = _poly_mul(_binomial_minus_one(p), _binomial_minus_one(q))
    quot = _poly_divexact(num, den)
    d = genus(K)
    return LaurentPoly.from_dict({i - d: c for i, c in enumerate(quot)})


def alexander_by_semigroup(K: TorusKnot) -> LaurentPoly:
    if K.is_unknot:
        return LaurentPoly(((0, 1),))
    S = semigroup(K)
    d = genus(K)
    coeffs = {}
    for i in range(-d, d + 1):
        coeffs[i] = (d + i in S) - (d + i - 1 in S)
    return LaurentPoly.from_dict(coeffs)


@lru_cache(maxsize=4096)
def alexander(K: TorusKnot, verify: bool = True) -> LaurentPoly:
    poly = alexander_by_semigroup(K)
    if verify and poly != alexander_by_division(K):
        raise InternalError(f"Alexander polynomial routes disagree for {K}")
    return poly


def stretch(K: TorusKnot) -> int | None:
    """First positive exponent of the Alexander polynomial when its constant term is -1.

    Returns None when the constant term is not -1 (the stretch is undefined).
    """
    if K.is_unknot:
        return None
    delta = alexander(K)
    if delta.coeff(0) != -1:
        return None
    return min(e for e, _ in delta.terms if e > 0)


def stretch_cf(K: TorusKnot) -> int | None:
    """Stretch from the continued fraction q/p = [a0, ..., ak] with q > p.

    Returns None when the expansion has fewer than three terms, where the
    formula is not asserted.
    """
    if K.is_unknot:
        return None
    p, q = K.key
    terms = continued_fraction(q, p).terms
    if len(terms) < 3:
        return None
    return (terms[-1] - 1) // 2 + 1


@dataclass(frozen=True)
class PinchStep:
    source: TorusKnot
    target: TorusKnot
    t: int
    h: int
    r: int
    s: int

    @property
    def positive(self) -> bool:
        return self.r * self.source.q - self.s * self.source.p > 0

    @property
    def sign(self) -> str:
        return "positive" if self.positive else "negative"


def pinch_once(K: TorusKnot) -> PinchStep:
    if K.is_unknot:
        raise ValidationError("cannot pinch the unknot")
    p, q = K.p, K.q
    t = -mod_inverse(q, p) % p
    h = mod_inverse(p, q)
    r, s = abs(p - 2 * t), abs(q - 2 * h)
    return PinchStep(K, TorusKnot(r, s), t, h, r, s)


def iter_pinches(K: TorusKnot) -> Iterator[PinchStep]:
    while not K.is_unknot:
        step = pinch_once(K)
        if step.r + step.s >= K.p + K.q:
            raise InternalError(f"pinch move on {K} did not shrink p + q")
        yield step
        K = step.target


def pinch_sequence(K: TorusKnot) -> list[PinchStep]:
    return list(iter_pinches(K))


def pinch_number(K: TorusKnot) -> int:
    return sum(1 for _ in iter_pinches(K))
