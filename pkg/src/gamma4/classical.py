"""Signature, Arf invariant and the mod 8 Mobius band parity obstruction."""

from __future__ import annotations

from dataclasses import dataclass

from gamma4.errors import InternalError
from gamma4.torusknot import TorusKnot, determinant

# sigma + 4 Arf must land in one of these residues mod 8 for a knot that
# bounds a Mobius band ("0 or +-2"). The set is closed under negation, so the
# verdict does not depend on the sign convention for the signature.
MOBIUS_PARITY_CLASSES = frozenset({0, 2, 6})


@dataclass(frozen=True)
class ClassicalRecord:
    knot: TorusKnot
    signature: int
    arf: int
    determinant: int
    yasuhara_class: int
    mobius_parity_obstructed: bool


def signature(K: TorusKnot) -> int:
    """Brieskorn lattice count over x = i/p + j/q, 0 < i < p, 0 < j < q.

    Points with x in (1/2, 3/2) contribute -1, the others +1. Everything is
    scaled by 2pq so the comparison stays in the integers.
    """
    if K.is_unknot:
        return 0
    p, q = K.p, K.q
    n = p * q
    total = 0
    for i in range(1, p):
        for j in range(1, q):
            x = 2 * (i * q + j * p)  # 2pq * x
            if x == n or x == 3 * n:
                raise InternalError(f"lattice point on a wall for {K}")
            total += -1 if n < x < 3 * n else 1
    return total


def arf(K: TorusKnot) -> int:
    if K.is_unknot:
        return 0
    p, q = K.even_first().p, K.even_first().q
    if p % 2 == 1:
        return 0
    return 0 if q % 8 in (1, 7) else 1


def yasuhara_class(sig: int, arf_value: int) -> int:
    """Residue of sigma + 4 Arf mod 8, with sigma taken positive on positive torus knots.

    ``signature`` returns the opposite (negative) convention, so the stored
    residue is (4 Arf - sig) mod 8, the negative of (sig + 4 Arf) mod 8.
    """
    return (4 * arf_value - sig) % 8


def yasuhara_obstruction(K: TorusKnot) -> ClassicalRecord:
    sig, a = signature(K), arf(K)
    cls = yasuhara_class(sig, a)
    return ClassicalRecord(
        knot=K,
        signature=sig,
        arf=a,
        determinant=determinant(K),
        yasuhara_class=cls,
        mobius_parity_obstructed=cls not in MOBIUS_PARITY_CLASSES,
    )
