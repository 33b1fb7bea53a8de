"""Goeritz matrix of T(p, q) for even p, and the linking form of its double branched cover."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from gamma4.errors import InternalError, MatrixTooLarge, NeedsEvenP
from gamma4.torusknot import TorusKnot

DEFAULT_MAX_MATRIX = 2000


@dataclass(frozen=True)
class GoeritzData:
    knot: TorusKnot  # even parameter first
    size: int
    matrix: tuple[tuple[int, ...], ...]
    determinant: int


@dataclass(frozen=True)
class CornerEntries:
    top_right: Fraction
    bottom_right: Fraction
    m: int  # bottom_right = m / q


@dataclass(frozen=True)
class LinkingFormValue:
    group_order: int
    value: Fraction  # lambda(x, x) in [0, 1)
    generator: str
    verified: bool = False  # True when the matrix route reproduced the value


def _even_odd(K: TorusKnot) -> tuple[int, int]:
    K = K.even_first()
    if K.p % 2 or K.p == 0 or K.q < 1:
        raise NeedsEvenP(f"{K} has no even parameter; the checkerboard construction needs one")
    return K.p, K.q


def goeritz_size(p: int, q: int) -> int:
    return (p * q - 2 * q + 2) // 2


def _build(p: int, q: int) -> list[list[int]]:
    n = goeritz_size(p, q)
    G = [[0] * n for _ in range(n)]
    G[0][0] = q
    blocks = p // 2 - 1
    if blocks == 0:
        # p = 2: only the corner disk remains
        return G
    for j in range(1, q + 1):
        G[0][j] = G[j][0] = -1
    for b in range(blocks):
        base = 1 + b * q
        for i in range(q):
            # cycle adjacency on the q disks of this level
            G[base + i][base + (i + 1) % q] = 1
            G[base + i][base + (i - 1) % q] = 1
            if b + 1 < blocks:
                G[base + i][base + q + i] = -1
                G[base + q + i][base + i] = -1
    return G


def goeritz_matrix(K: TorusKnot, max_size: int = DEFAULT_MAX_MATRIX) -> GoeritzData:
    p, q = _even_odd(K)
    n = goeritz_size(p, q)
    if n > max_size:
        raise MatrixTooLarge(f"Goeritz matrix of {K} has size {n} > {max_size}")
    G = _build(p, q)
    det, _ = _solve(G, None)
    return GoeritzData(TorusKnot(p, q), n, tuple(tuple(r) for r in G), det)


def _solve(G: list[list[int]], rhs: list[int] | None) -> tuple[int, list[Fraction] | None]:
    """Exact determinant, and the solution of G x = rhs when rhs is given.

    Sparse row elimination over the rationals with partial pivoting.
    """
    n = len(G)
    rows = [{j: Fraction(v) for j, v in enumerate(r) if v} for r in G]
    b = [Fraction(v) for v in rhs] if rhs is not None else [Fraction(0)] * n
    det = Fraction(1)
    perm = list(range(n))
    for c in range(n):
        piv = next((r for r in range(c, n) if rows[perm[r]].get(c)), None)
        if piv is None:
            return 0, None
        if piv != c:
            perm[c], perm[piv] = perm[piv], perm[c]
            det = -det
        pr = rows[perm[c]]
        pv = pr[c]
        det *= pv
        for r in range(c + 1, n):
            row = rows[perm[r]]
            f = row.get(c)
            if not f:
                continue
            f = f / pv
            for j, v in pr.items():
                nv = row.get(j, 0) - f * v
                if nv:
                    row[j] = nv
                else:
                    row.pop(j, None)
            b[perm[r]] -= f * b[perm[c]]
    if det.denominator != 1:
        raise InternalError("determinant of an integer matrix is not an integer")
    if rhs is None:
        return int(det), None
    x = [Fraction(0)] * n
    for c in range(n - 1, -1, -1):
        row = rows[perm[c]]
        s = b[perm[c]] - sum(v * x[j] for j, v in row.items() if j > c)
        x[c] = s / row[c]
    return int(det), x


def corner_row_vector(K: TorusKnot) -> list[int]:
    """The row vector (p/2, p/2 - 1 repeated q times, ..., 1 repeated q times)."""
    p, q = _even_odd(K)
    v = [p // 2]
    for level in range(p // 2 - 1, 0, -1):
        v.extend([level] * q)
    return v


def vector_times_matrix(v: list[int], G) -> list[int]:
    n = len(G)
    return [sum(v[i] * G[i][j] for i in range(n)) for j in range(n)]


def corner_inverse_entries(data: GoeritzData) -> CornerEntries:
    p, q = data.knot.p, data.knot.q
    n = data.size
    G = [list(r) for r in data.matrix]
    e = [0] * n
    e[n - 1] = 1
    det, col = _solve(G, e)
    if det == 0 or col is None:
        raise InternalError(f"Goeritz matrix of {data.knot} is singular")
    # G is symmetric, so its last column is also its last row
    top_right, bottom_right = col[0], col[n - 1]
    if top_right != Fraction(1, q):
        raise InternalError(f"top right entry of the inverse is {top_right}, expected 1/{q}")
    scaled = bottom_right * q
    if scaled.denominator != 1:
        raise InternalError(f"bottom right entry {bottom_right} is not a multiple of 1/{q}")
    m = int(scaled)
    if (m * (p // 2) - 1) % q:
        raise InternalError(f"m = {m} does not satisfy m p/2 = 1 mod {q}")
    return CornerEntries(top_right, bottom_right, m)


def _mod1(x: Fraction) -> Fraction:
    return x - (x.numerator // x.denominator)


def linking_form_closed(K: TorusKnot) -> LinkingFormValue:
    p, q = _even_odd(K)
    return LinkingFormValue(q, _mod1(Fraction(-p, 2 * q)), "closed form")


def linking_form_from_matrix(K: TorusKnot, max_size: int = DEFAULT_MAX_MATRIX) -> LinkingFormValue:
    """lambda(x, x) for x = (p/2) times the class dual to the last handle.

    The linking form is presented by -G^{-1} mod 1 and the corner entry is m/q,
    so lambda(x, x) = -m (p/2)^2 / q mod 1.
    """
    data = goeritz_matrix(K, max_size)
    p, q = data.knot.p, data.knot.q
    corners = corner_inverse_entries(data)
    return LinkingFormValue(q, _mod1(Fraction(-corners.m * (p // 2) ** 2, q)), "matrix")


def linking_form(K: TorusKnot, verify: bool = True, max_size: int = DEFAULT_MAX_MATRIX) -> LinkingFormValue:
    """Closed-form value, cross-checked through G^{-1} when the matrix fits under ``max_size``."""
    value = linking_form_closed(K)
    p, q = _even_odd(K)
    if not verify or goeritz_size(p, q) > max_size:
        return value
    other = linking_form_from_matrix(K, max_size)
    if other.value != value.value:
        raise InternalError(f"linking form routes disagree for {K}: {value.value} vs {other.value}")
    return LinkingFormValue(value.group_order, value.value, "(p/2) x dual of the last handle", True)
