"""Quadratic-residue obstruction to locally flat Mobius bands, and its density."""

from __future__ import annotations

import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from gamma4.arith import (
    DEFAULT_MAX_FACTOR_DIGITS,
    Factorization,
    factorize,
    is_perfect_square,
    jacobi_symbol,
    primes_in_class,
)
from gamma4.errors import Inapplicable, InternalError, NeedsEvenP, ValidationError
from gamma4.torusknot import TorusKnot

WITNESSES = 3


@dataclass(frozen=True)
class ObstructionResidues:
    p: int
    modulus: int
    classes: tuple[int, ...]
    witnesses: dict  # r -> the witness primes that were checked
    # classes not congruent to 1 mod 4; the quadratic character argument that
    # produces obstructing classes only yields r = 1 mod 4
    flagged: tuple[int, ...] = ()


class Verdict(str, enum.Enum):
    OBSTRUCTED = "obstructed"
    NOT_OBSTRUCTED = "not_obstructed_by_this_test"
    INAPPLICABLE = "inapplicable"


@dataclass(frozen=True)
class ObstructionResult:
    knot: TorusKnot
    verdict: Verdict
    witness_prime: Optional[int] = None
    reason: str = ""


def _check_p(p: int):
    if p <= 0 or p % 2:
        raise NeedsEvenP(f"the residue obstruction needs an even p, got {p}")
    if is_perfect_square(p // 2):
        raise Inapplicable(f"p/2 = {p // 2} is a perfect square")


def _nonresidue_pair(p: int, s: int) -> bool:
    half = p // 2
    return jacobi_symbol(half, s) == -1 and jacobi_symbol(-half % s, s) == -1


_RESIDUE_CACHE: dict[int, ObstructionResidues] = {}


def obstructing_residues(p: int) -> ObstructionResidues:
    """Classes r mod 2p, coprime to 2p, for which both p/2 and -p/2 are nonresidues mod s = r.

    The verdict is a function of the class; it is decided on the least prime of
    the class and re-checked on the next two.
    """
    if p in _RESIDUE_CACHE:
        return _RESIDUE_CACHE[p]
    _check_p(p)
    modulus = 2 * p
    classes, witnesses = [], {}
    for r in range(1, modulus):
        if math.gcd(r, modulus) != 1:
            continue
        gen = primes_in_class(r, modulus)
        primes = [next(gen) for _ in range(WITNESSES)]
        verdicts = {_nonresidue_pair(p, s) for s in primes}
        if len(verdicts) != 1:
            raise InternalError(f"witness primes {primes} disagree on class {r} mod {modulus}")
        witnesses[r] = tuple(primes)
        if verdicts.pop():
            classes.append(r)
    if not classes:
        raise InternalError(f"no obstructing class found for p = {p}")
    out = ObstructionResidues(
        p=p,
        modulus=modulus,
        classes=tuple(classes),
        witnesses=witnesses,
        flagged=tuple(r for r in classes if r % 4 != 1),
    )
    _RESIDUE_CACHE[p] = out
    return out


def lf_mobius_obstructed(
    K: TorusKnot, max_digits: int = DEFAULT_MAX_FACTOR_DIGITS, factorization: Optional[Factorization] = None
) -> ObstructionResult:
    """Residue test; ``factorization`` may supply a precomputed factorization of the odd parameter."""
    if K.is_unknot:
        return ObstructionResult(K, Verdict.NOT_OBSTRUCTED, reason="unknot")
    E = K.even_first()
    p, q = E.p, E.q
    if p % 2:
        return ObstructionResult(K, Verdict.INAPPLICABLE, reason="both parameters are odd")
    if is_perfect_square(p // 2):
        return ObstructionResult(K, Verdict.INAPPLICABLE, reason=f"p/2 = {p // 2} is a perfect square")
    res = obstructing_residues(p)
    if factorization is None:
        factorization = factorize(q, max_digits)
    elif factorization.value != q:
        raise ValidationError(f"factorization of {factorization.value} supplied for q = {q}")
    for s in factorization.odd_power_primes():
        if s % res.modulus in res.classes:
            return ObstructionResult(
                K,
                Verdict.OBSTRUCTED,
                witness_prime=s,
                reason=f"{s} divides {q} to an odd power and {s} = {s % res.modulus} mod {res.modulus}",
            )
    return ObstructionResult(K, Verdict.NOT_OBSTRUCTED, reason="no odd-power prime factor in an obstructing class")


# ---------------------------------------------------------------------------
# density experiment


@dataclass(frozen=True)
class DensityReport:
    p: int
    N: int
    eligible: int
    obstructed: int
    ratio: Fraction  # share of eligible q that are NOT obstructed
    mertens_estimate: Fraction  # product of s/(s+1) over obstructing-class primes s <= N
    monotone: Optional[bool] = None  # ratio <= every cached ratio at smaller N (None: nothing to compare)
    compared_with: tuple[int, ...] = ()

    CSV_FIELDS = ("p", "N", "eligible", "obstructed", "ratio_num", "ratio_den", "ratio_decimal", "mertens_decimal", "monotone")

    def csv_row(self) -> list:
        return [
            self.p,
            self.N,
            self.eligible,
            self.obstructed,
            self.ratio.numerator,
            self.ratio.denominator,
            decimal_string(self.ratio),
            decimal_string(self.mertens_estimate),
            self.monotone,
        ]


def decimal_string(x: Fraction, digits: int = 12) -> str:
    """x rounded half-up to ``digits`` decimal places, computed exactly."""
    scaled = x * 10**digits
    n = (scaled.numerator * 2 + scaled.denominator) // (2 * scaled.denominator)
    sign = "-" if n < 0 else ""
    whole, frac_part = divmod(abs(n), 10**digits)
    if digits == 0:
        return f"{sign}{whole}"
    return f"{sign}{whole}.{frac_part:0{digits}d}"


def prime_sieve(n: int) -> bytearray:
    flags = bytearray([1]) * (n + 1)
    flags[0] = 0
    if n >= 1:
        flags[1] = 0
    for i in range(2, math.isqrt(n) + 1):
        if flags[i]:
            flags[i * i :: i] = bytearray(len(range(i * i, n + 1, i)))
    return flags


def _class_primes(p: int, N: int) -> list[int]:
    res = obstructing_residues(p)
    flags = prime_sieve(N)
    classes = set(res.classes)
    return [s for s in range(2, N + 1) if flags[s] and s % res.modulus in classes]


def _count_range(args) -> tuple[int, int]:
    """(eligible, obstructed) for q in [lo, hi)."""
    p, lo, hi, primes = args
    width = hi - lo
    obstructed = bytearray(width)
    for s in primes:
        if s >= hi:
            break
        start = (lo + s - 1) // s * s
        for m in range(start, hi, s):
            t, e = m // s, 1
            while t % s == 0:
                t //= s
                e += 1
            if e % 2:
                obstructed[m - lo] = 1
    p_primes = [s for s, _ in factorize(p).factors]
    eligible = bytearray([1]) * width
    for s in p_primes:
        start = (lo + s - 1) // s * s
        eligible[start - lo :: s] = bytearray(len(range(start, hi, s)))
    n_eligible = sum(eligible)
    n_obstructed = sum(1 for i in range(width) if eligible[i] and obstructed[i])
    return n_eligible, n_obstructed


def _product(values: list[int]) -> int:
    # balanced product tree keeps the big multiplications few
    if not values:
        return 1
    while len(values) > 1:
        values = [values[i] * values[i + 1] if i + 1 < len(values) else values[i] for i in range(0, len(values), 2)]
    return values[0]


_DENSITY_CACHE: dict[tuple[int, int], Fraction] = {}


def density_experiment(p: int, N: int, jobs: int = 1, chunks: int | None = None) -> DensityReport:
    if N < 1:
        raise ValidationError("N must be positive")
    _check_p(p)
    primes = _class_primes(p, N)
    parts = chunks or max(1, jobs)
    bounds = [1 + (N * i) // parts for i in range(parts)] + [N + 1]
    tasks = [(p, bounds[i], bounds[i + 1], primes) for i in range(parts) if bounds[i] < bounds[i + 1]]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_count_range, tasks))
    else:
        results = [_count_range(t) for t in tasks]
    eligible = sum(r[0] for r in results)
    obstructed = sum(r[1] for r in results)
    ratio = Fraction(eligible - obstructed, eligible)
    mertens = Fraction(_product(list(primes)), _product([s + 1 for s in primes]))
    smaller = sorted(n for (pp, n) in _DENSITY_CACHE if pp == p and n < N)
    monotone = all(ratio <= _DENSITY_CACHE[(p, n)] for n in smaller) if smaller else None
    _DENSITY_CACHE[(p, N)] = ratio
    return DensityReport(p, N, eligible, obstructed, ratio, mertens, monotone, tuple(smaller))
