"""Exact integer and number-theoretic primitives.

Python integers are arbitrary precision, so nothing here can overflow. The
primality test is the deterministic Miller-Rabin variant with the first
thirteen prime bases, which is proven correct below ``PRIMALITY_BOUND``.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction

from gamma4.errors import (
    FactorizationTooHard,
    NoDirichletClass,
    NoInverse,
    SearchExhausted,
    ValidationError,
)

PRIMALITY_BOUND = 3_317_044_064_679_887_385_961_981
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
_TRIAL_CUTOFF = 1000
_SMALL_PRIMES = [p for p in range(2, _TRIAL_CUTOFF) if all(p % d for d in range(2, math.isqrt(p) + 1))]

DEFAULT_MAX_FACTOR_DIGITS = 24
DEFAULT_PRIME_SEARCH_CEILING = 10**12
RHO_SEED = 20210611


@dataclass(frozen=True)
class Factorization:
    value: int
    factors: tuple[tuple[int, int], ...]

    def as_dict(self) -> dict[int, int]:
        return dict(self.factors)

    def odd_power_primes(self) -> list[int]:
        return [s for s, e in self.factors if e % 2 == 1]


@dataclass(frozen=True)
class ContinuedFraction:
    numerator: int
    denominator: int
    terms: tuple[int, ...]

    def evaluate(self) -> Fraction:
        value = Fraction(self.terms[-1])
        for a in reversed(self.terms[:-1]):
            value = a + 1 / value
        return value


def gcd(a: int, b: int) -> int:
    if a == 0 and b == 0:
        raise ValidationError("gcd(0, 0) is undefined")
    return math.gcd(a, b)


def mod_inverse(a: int, m: int) -> int:
    """Inverse of ``a`` modulo ``m`` as a representative in ``[1, m-1]``."""
    if m < 2:
        raise ValidationError(f"modulus must be at least 2, got {m}")
    if math.gcd(a, m) != 1:
        raise NoInverse(f"{a} has no inverse modulo {m}")
    return pow(a, -1, m)


def jacobi_symbol(a: int, n: int) -> int:
    if n < 1 or n % 2 == 0:
        raise ValidationError(f"Jacobi symbol needs an odd positive modulus, got {n}")
    a %= n
    result = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def continued_fraction(num: int, den: int) -> ContinuedFraction:
    if num < 1 or den < 1:
        raise ValidationError("continued fractions are taken of positive fractions")
    if math.gcd(num, den) != 1:
        raise ValidationError(f"{num}/{den} is not in lowest terms")
    terms = []
    a, b = num, den
    while b:
        terms.append(a // b)
        a, b = b, a % b
    # [..., a, 1] == [..., a + 1]
    if len(terms) > 1 and terms[-1] == 1:
        terms[-2] += 1
        terms.pop()
    return ContinuedFraction(num, den, tuple(terms))


def is_perfect_square(n: int) -> bool:
    if n < 0:
        raise ValidationError("is_perfect_square expects a nonnegative integer")
    r = math.isqrt(n)
    return r * r == n


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in _SMALL_PRIMES:
        if n % p == 0:
            return n == p
    if n < _TRIAL_CUTOFF * _TRIAL_CUTOFF:
        return True
    if n >= PRIMALITY_BOUND:
        raise FactorizationTooHard(f"primality of {n} is outside the deterministic range")
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _brent_rho(n: int, rng: random.Random) -> int:
    if n % 2 == 0:
        return 2
    while True:
        y, c, m = rng.randrange(1, n), rng.randrange(1, n), 128
        g = r = q = 1
        x = ys = y
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g


def factorize(n: int, max_digits: int = DEFAULT_MAX_FACTOR_DIGITS) -> Factorization:
    """Complete prime factorization, primes in increasing order.

    Trial division by primes below 1000, then Brent's rho with a fixed seed,
    so the result and the work done are reproducible.
    """
    if n < 1:
        raise ValidationError(f"factorize expects a positive integer, got {n}")
    if len(str(n)) > max_digits:
        raise FactorizationTooHard(f"{n} has more than {max_digits} digits")
    counts: dict[int, int] = {}
    m = n
    for p in _SMALL_PRIMES:
        if p * p > m:
            break
        while m % p == 0:
            counts[p] = counts.get(p, 0) + 1
            m //= p
    rng = random.Random(RHO_SEED)
    stack = [m] if m > 1 else []
    while stack:
        c = stack.pop()
        if is_prime(c):
            counts[c] = counts.get(c, 0) + 1
            continue
        d = _brent_rho(c, rng)
        stack.extend((d, c // d))
    return Factorization(n, tuple(sorted(counts.items())))


def smallest_prime_in_class(r: int, m: int, ceiling: int = DEFAULT_PRIME_SEARCH_CEILING) -> int:
    """Least prime congruent to ``r`` modulo ``m``."""
    return next(primes_in_class(r, m, ceiling))


def primes_in_class(r: int, m: int, ceiling: int = DEFAULT_PRIME_SEARCH_CEILING):
    if m < 1:
        raise ValidationError("modulus must be positive")
    if math.gcd(r, m) != 1:
        raise NoDirichletClass(f"gcd({r}, {m}) != 1, the class holds at most one prime")
    s = r % m
    if s < 2:
        s += m
    while s <= ceiling:
        if is_prime(s):
            yield s
        s += m
    raise SearchExhausted(f"no further prime = {r} mod {m} below {ceiling}")
