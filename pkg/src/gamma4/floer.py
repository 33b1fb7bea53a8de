"""delta-graded complexes over F2[U] with an involution, and their upsilon invariants.

A complex is free over F2[U] on finitely many homogeneous generators. All
homology computations go through one observation: in grading r the chain group
is spanned by the U^k g with delta(g) - k = r, and sending U^k g to g identifies
it with the F2-span S_r of the generators of grading >= r. Under this
identification the differential is the U = 1 matrix D restricted to S_r and
multiplication by U is the inclusion S_r -> S_{r-1}. Once r is below every
generator grading, S_r is the whole space, so "for all n" statements about U^n
reduce to a single computation with all generators present. Everything is
exact linear algebra over F2, with vectors stored as Python int bitmasks.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from gamma4.errors import (
    ComplexFormatError,
    ConstantTermPlusOne,
    NotAComplex,
    NotCovered,
    NotStaircase,
    StructureViolation,
    ValidationError,
)
from gamma4.torusknot import LaurentPoly, TorusKnot, alexander, stretch

# (source index, U exponent, target index): the image of the source contains U^e target
Entry = tuple[int, int, int]


@dataclass(frozen=True)
class CfkComplex:
    names: tuple[str, ...]
    gradings: tuple[int, ...]
    differential: tuple[Entry, ...]

    def __post_init__(self):
        _check_entries(self, self.differential, degree=-1, what="differential")
        if _compose_parity(self.differential, self.differential, len(self.names)):
            raise NotAComplex("the differential does not square to zero")

    @property
    def size(self) -> int:
        return len(self.names)

    def matrix(self) -> list[list[int | None]]:
        """Square matrix with entry [i][j] = e when the image of generator j contains U^e g_i."""
        m: list[list[int | None]] = [[None] * self.size for _ in range(self.size)]
        for j, e, i in self.differential:
            m[i][j] = e
        return m

    def unit_images(self) -> list[int]:
        return _unit_images(self.differential, self.size)


@dataclass(frozen=True)
class Involution:
    entries: tuple[Entry, ...]

    def unit_images(self, n: int) -> list[int]:
        return _unit_images(self.entries, n)

    def inverse(self, C: CfkComplex) -> Involution:
        """Inverse map, for an involution that is invertible at U = 1."""
        inv = _invert_f2(self.unit_images(C.size), C.size)
        if inv is None:
            raise StructureViolation("involution is not invertible")
        return Involution(tuple(_graded_entries(inv, C.gradings, degree=0)))

    def compose(self, other: Involution, C: CfkComplex) -> Involution:
        """self after other, as a grading-preserving map of C."""
        n = C.size
        a, b = self.unit_images(n), other.unit_images(n)
        out = [0] * n
        for j in range(n):
            v = 0
            for k in _bits(b[j]):
                v ^= a[k]
            out[j] = v
        return Involution(tuple(_graded_entries(out, C.gradings, degree=0)))


def _bits(v: int) -> Iterable[int]:
    while v:
        low = v & -v
        yield low.bit_length() - 1
        v ^= low


def _unit_images(entries: Iterable[Entry], n: int) -> list[int]:
    images = [0] * n
    for j, _, i in entries:
        images[j] ^= 1 << i
    return images


def _graded_entries(images: Sequence[int], gradings: Sequence[int], degree: int) -> list[Entry]:
    # a homogeneous map of the given degree is determined by its U = 1 matrix
    out = []
    for j, v in enumerate(images):
        for i in _bits(v):
            e = gradings[i] - gradings[j] - degree
            if e < 0:
                raise StructureViolation("map is not homogeneous over F2[U]")
            out.append((j, e, i))
    return out


def _check_entries(C: CfkComplex, entries: Iterable[Entry], degree: int, what: str):
    n = len(C.names)
    if len(C.gradings) != n:
        raise ValidationError("one grading per generator is required")
    if len(set(C.names)) != n:
        raise ValidationError("generator names must be distinct")
    seen = set()
    for j, e, i in entries:
        if not (0 <= i < n and 0 <= j < n):
            raise ValidationError(f"{what} refers to a generator index out of range")
        if e < 0:
            raise ValidationError(f"{what} has a negative U exponent")
        if (j, i) in seen:
            raise ValidationError(f"{what} lists {C.names[j]} -> {C.names[i]} twice")
        seen.add((j, i))
        # U has degree -1, so U^e g_i sits in grading delta_i - e
        if C.gradings[i] - e != C.gradings[j] + degree:
            raise NotAComplex(
                f"{what} term {C.names[j]} -> U^{e} {C.names[i]} breaks the grading rule"
            )


def _compose_parity(first: Iterable[Entry], second: Iterable[Entry], n: int) -> bool:
    """True when (second after first) is nonzero; homogeneity makes parity at U = 1 decisive."""
    a, b = _unit_images(first, n), _unit_images(second, n)
    for j in range(n):
        v = 0
        for k in _bits(a[j]):
            v ^= b[k]
        if v:
            return True
    return False


def _check_involution(C: CfkComplex, iota: Involution):
    _check_entries(C, iota.entries, degree=0, what="involution")
    n = C.size
    d, t = C.unit_images(), iota.unit_images(n)
    for j in range(n):
        left = 0
        for k in _bits(d[j]):
            left ^= t[k]
        right = 0
        for k in _bits(t[j]):
            right ^= d[k]
        if left != right:
            raise StructureViolation("involution does not commute with the differential")


class _Echelon:
    """Incremental F2 row echelon form over int bitmasks, keyed by leading bit."""

    def __init__(self, vectors: Iterable[int] = ()):
        self.rows: dict[int, int] = {}
        for v in vectors:
            self.add(v)

    def reduce(self, v: int) -> int:
        while v:
            top = v.bit_length() - 1
            row = self.rows.get(top)
            if row is None:
                return v
            v ^= row
        return 0

    def add(self, v: int) -> bool:
        v = self.reduce(v)
        if v:
            self.rows[v.bit_length() - 1] = v
            return True
        return False

    def __contains__(self, v: int) -> bool:
        return self.reduce(v) == 0

    def __len__(self):
        return len(self.rows)


def _rank(*groups: Iterable[int]) -> int:
    e = _Echelon()
    for g in groups:
        for v in g:
            e.add(v)
    return len(e)


def _invert_f2(images: Sequence[int], n: int) -> list[int] | None:
    # solve images * inv = id column by column
    pivots: dict[int, tuple[int, int]] = {}
    for j, v in enumerate(images):
        comb = 1 << j
        while v:
            top = v.bit_length() - 1
            if top not in pivots:
                break
            pv, pc = pivots[top]
            v ^= pv
            comb ^= pc
        if not v:
            return None
        pivots[v.bit_length() - 1] = (v, comb)
    out = []
    for i in range(n):
        target, comb = 1 << i, 0
        while target:
            top = target.bit_length() - 1
            pv, pc = pivots[top]
            target ^= pv
            comb ^= pc
        out.append(comb)
    return out


@dataclass(frozen=True)
class _Filtration:
    """Cycle and boundary data of a complex, organised by grading."""

    gradings: tuple[int, ...]
    levels: tuple[int, ...]  # distinct gradings, descending
    cycles: dict[int, tuple[int, ...]]  # r -> basis of Z_r
    boundaries: dict[int, tuple[int, ...]]  # r -> spanning set of B_r = D(S_{r+1})
    all_cycles: tuple[int, ...]
    all_boundaries: tuple[int, ...]

    @property
    def top(self) -> int:
        return self.levels[0]

    @property
    def bottom(self) -> int:
        return self.levels[-1]

    def _key(self, r: int) -> int:
        # S_r is spanned by the generators of grading >= r
        return min(x for x in self.levels if x >= r)

    def Z(self, r: int) -> tuple[int, ...]:
        """Basis of the cycles in grading r."""
        if r > self.top:
            return ()
        if r <= self.bottom:
            return self.all_cycles
        return self.cycles[self._key(r)]

    def B(self, r: int) -> tuple[int, ...]:
        """Spanning set of the boundaries in grading r, the image of S_{r+1}."""
        if r + 1 > self.top:
            return ()
        if r + 1 <= self.bottom:
            return self.all_boundaries
        return self.boundaries[self._key(r + 1)]


def _filtration(gradings: Sequence[int], images: Sequence[int]) -> _Filtration:
    n = len(gradings)
    order = sorted(range(n), key=lambda i: -gradings[i])
    levels = tuple(sorted(set(gradings), reverse=True))
    pivots: dict[int, tuple[int, int]] = {}
    kernel: list[int] = []
    image_span: list[int] = []
    cycles: dict[int, tuple[int, ...]] = {}
    boundaries: dict[int, tuple[int, ...]] = {}
    pos = 0
    for level in levels:
        while pos < n and gradings[order[pos]] == level:
            j = order[pos]
            pos += 1
            v, comb = images[j], 1 << j
            if v:
                image_span.append(v)
            while v:
                top = v.bit_length() - 1
                if top not in pivots:
                    break
                pv, pc = pivots[top]
                v ^= pv
                comb ^= pc
            if v:
                pivots[v.bit_length() - 1] = (v, comb)
            else:
                kernel.append(comb)
        cycles[level] = tuple(kernel)
        boundaries[level] = tuple(image_span)
    return _Filtration(
        gradings=tuple(gradings),
        levels=levels,
        cycles=cycles,
        boundaries=boundaries,
        all_cycles=tuple(kernel),
        all_boundaries=tuple(image_span),
    )


def _check_squares_to_zero(images: Sequence[int]):
    for v in images:
        w = 0
        for k in _bits(v):
            w ^= images[k]
        if w:
            raise NotAComplex("the differential does not square to zero")


@dataclass(frozen=True)
class TorsionSummand:
    grading: int
    order: int  # the summand is F2[U]/U^order generated in this grading


@dataclass(frozen=True)
class HomologyDecomposition:
    towers: tuple[int, ...]
    torsion: tuple[TorsionSummand, ...]

    @property
    def rank(self) -> int:
        return len(self.towers)


def _decompose(gradings: Sequence[int], images: Sequence[int]) -> HomologyDecomposition:
    _check_squares_to_zero(images)
    if not gradings:
        return HomologyDecomposition((), ())
    F = _filtration(gradings, images)
    hi, lo = F.top, F.bottom
    towers: list[int] = []
    torsion: list[TorsionSummand] = []

    def beta(r: int, k: int) -> int:
        # summands generated in grading r on which U^k is still nonzero
        B = F.B(r - k)
        return _rank(F.Z(r), B) - _rank(F.Z(r + 1), B)

    for r in range(hi, lo - 1, -1):
        if not F.Z(r):
            continue
        prev = beta(r, 0)
        for k in range(1, r - lo + 2):
            cur = beta(r, k)
            torsion.extend([TorsionSummand(r, k)] * (prev - cur))
            prev = cur
        # below the lowest generator every boundary is present
        towers.extend([r] * prev)
    return HomologyDecomposition(tuple(towers), tuple(torsion))


def homology(C: CfkComplex) -> HomologyDecomposition:
    return _decompose(C.gradings, C.unit_images())


def localized_rank(images: Sequence[int]) -> int:
    """Rank of homology after inverting U, that is of the U = 1 complex."""
    n = len(images)
    r = _rank(images)
    return n - 2 * r


def _upsilon_from(F: _Filtration) -> int | None:
    B = _Echelon(F.all_boundaries)
    for r in range(F.top, F.bottom - 1, -1):
        if any(z not in B for z in F.Z(r)):
            return r
    return None


# ---------------------------------------------------------------------------
# staircases


def staircase_exponents(delta: LaurentPoly) -> list[int]:
    """Exponents of an L-space shaped polynomial, descending, with signs +,-,+,...

    Raises NotStaircase unless the nonzero coefficients are +-1, alternate in
    sign starting from +1 at the top, and are symmetric.
    """
    terms = sorted(delta.terms, reverse=True)
    if not terms or not delta.is_symmetric():
        raise NotStaircase(f"{delta} is not symmetric")
    for k, (e, c) in enumerate(terms):
        if c != (-1) ** k:
            raise NotStaircase(f"{delta} does not have alternating unit coefficients")
    if len(terms) % 2 == 0 or terms[len(terms) // 2][0] != 0:
        raise NotStaircase(f"{delta} has no constant term")
    return [e for e, _ in terms]


def gaps_from_exponents(alphas: Sequence[int]) -> list[int]:
    """n_1 < ... < n_m from the descending exponent list."""
    m = len(alphas) // 2
    return sorted(alphas[:m])


def staircase_from_gaps(gaps: Sequence[int]) -> tuple[CfkComplex, Involution]:
    gaps = list(gaps)
    if any(g <= 0 for g in gaps) or any(a >= b for a, b in zip(gaps, gaps[1:])):
        raise NotStaircase("gap sequence must be strictly increasing and positive")
    m = len(gaps)
    alphas = sorted(gaps, reverse=True) + [0] + [-g for g in gaps]
    # Maslov gradings along the staircase; the top generator sits at 0
    maslov = [0]
    for k in range(1, 2 * m + 1):
        if k % 2:
            maslov.append(maslov[-1] - 2 * (alphas[k - 1] - alphas[k]) + 1)
        else:
            maslov.append(maslov[-1] - 1)
    gradings = tuple(M - a for M, a in zip(maslov, alphas))
    entries = []
    for k in range(1, 2 * m, 2):
        entries.append((k, alphas[k - 1] - alphas[k], k - 1))
        entries.append((k, alphas[k] - alphas[k + 1], k + 1))
    names = []
    for k in range(2 * m + 1):
        s = m - k
        names.append("x0" if s == 0 else (f"x1_{s}" if s > 0 else f"x2_{-s}"))
    C = CfkComplex(tuple(names), gradings, tuple(entries))
    iota = Involution(tuple((k, 0, 2 * m - k) for k in range(2 * m + 1)))
    _check_involution(C, iota)
    return C, iota


def staircase(K: TorusKnot | Sequence[int]) -> tuple[CfkComplex, Involution]:
    if isinstance(K, TorusKnot):
        if K.is_unknot:
            return staircase_from_gaps([])
        return staircase_from_gaps(gaps_from_exponents(staircase_exponents(alexander(K))))
    return staircase_from_gaps(K)


def first_gap(K: TorusKnot) -> int | None:
    if K.is_unknot:
        return None
    gaps = gaps_from_exponents(staircase_exponents(alexander(K)))
    return gaps[0] if gaps else None


# ---------------------------------------------------------------------------
# upsilon and the involutive refinements


def complex_upsilon(C: CfkComplex) -> int:
    images = C.unit_images()
    if localized_rank(images) != 1:
        raise StructureViolation("homology after inverting U does not have rank 1")
    F = _filtration(C.gradings, images)
    return _upsilon_from(F)


def upsilon(K: TorusKnot) -> int:
    C, _ = staircase(K)
    return complex_upsilon(C)


@dataclass(frozen=True)
class HfkiSummary:
    upsilon: int
    upsilon_bar: int
    upsilon_underbar: int
    # gradings of the U-tower generators of the cone homology, and for each of
    # the two defining conditions the grading of the best witness
    cone_towers: tuple[int, ...] = ()
    complex_towers: tuple[int, ...] = ()
    extra: dict = field(default_factory=dict, compare=False)

    def as_dict(self) -> dict:
        return {
            "upsilon": self.upsilon,
            "upsilon_bar": self.upsilon_bar,
            "upsilon_underbar": self.upsilon_underbar,
            "cone_towers": list(self.cone_towers),
            "complex_towers": list(self.complex_towers),
        }


def mapping_cone(C: CfkComplex, iota: Involution) -> tuple[tuple[int, ...], list[int]]:
    """Gradings and U = 1 differential of the cone of 1 + iota.

    Basis: the generators g_0..g_{n-1} of C, then Q g_0..Q g_{n-1} with
    grading lowered by one. d(a + Q b) = d a + Q((1 + iota) a + d b).
    """
    n = C.size
    d = C.unit_images()
    t = iota.unit_images(n)
    images = []
    for j in range(n):
        images.append(d[j] | (((1 << j) ^ t[j]) << n))
    for j in range(n):
        images.append(d[j] << n)
    gradings = tuple(C.gradings) + tuple(g - 1 for g in C.gradings)
    return gradings, images


def involutive_upsilons(C: CfkComplex, iota: Involution, with_towers: bool = True) -> HfkiSummary:
    """Involutive upsilons; ``with_towers`` also records the tower gradings of both homologies."""
    _check_involution(C, iota)
    n = C.size
    ups = complex_upsilon(C)
    gradings, images = mapping_cone(C, iota)
    if localized_rank(images) != 2:
        raise StructureViolation("localized mapping cone homology does not have rank 2")
    F = _filtration(gradings, images)
    low_mask = (1 << n) - 1
    # classes in the image of Q: Q(a + Q b) = Q a for cycles a + Q b
    q_image = tuple((z & low_mask) << n for z in F.all_cycles)
    B_inf = _Echelon(F.all_boundaries)
    QB = _Echelon(F.all_boundaries)
    for v in q_image:
        QB.add(v)
    dim_B, dim_QB = len(B_inf), len(QB)

    underbar = None
    for r in range(F.top, F.bottom - 1, -1):
        if any(z not in QB for z in F.Z(r)):
            underbar = r
            break

    bar = None
    for r in range(F.top, F.bottom - 1, -1):
        Z = F.Z(r)
        if not Z:
            continue
        zb = _rank(Z, F.all_boundaries)
        total = _rank(Z, F.all_boundaries, q_image)
        if zb + dim_QB - total > dim_B:
            bar = r + 1
            break

    if underbar is None or bar is None:
        raise StructureViolation("mapping cone homology lacks the expected towers")
    summary = HfkiSummary(
        upsilon=ups,
        upsilon_bar=bar,
        upsilon_underbar=underbar,
        cone_towers=_decompose(gradings, images).towers if with_towers else (),
        complex_towers=homology(C).towers if with_towers else (),
    )
    if not (bar >= ups >= underbar):
        raise StructureViolation(f"expected upsilon_bar >= upsilon >= upsilon_underbar, got {summary}")
    return summary


def involutive_upsilons_lspace(K: TorusKnot) -> HfkiSummary:
    if stretch(K) is None:
        raise ConstantTermPlusOne(f"Alexander polynomial of {K} does not have constant term -1")
    C, iota = staircase(K)
    s = involutive_upsilons(C, iota)
    n1 = first_gap(K)
    if s.upsilon_bar != s.upsilon:
        raise StructureViolation(f"{K}: upsilon_bar {s.upsilon_bar} differs from upsilon {s.upsilon}")
    if s.upsilon_bar - s.upsilon_underbar < n1:
        raise StructureViolation(f"{K}: upsilon_bar - upsilon_underbar is below n_1 = {n1}")
    return s


def thin_knot_upsilons(sigma: int, arf: int) -> tuple[int, int, int]:
    """(upsilon_bar, upsilon, upsilon_underbar) of a thin knot from sigma and Arf."""
    if sigma % 2 or arf not in (0, 1):
        raise ValidationError("sigma must be even and Arf must be 0 or 1")
    r = (sigma + 4 * arf) % 8
    if r == 0:
        return (0, 0, 0)
    if r == 4:
        return (1, 0, -1)
    raise NotCovered(f"sigma + 4 Arf = {r} mod 8 is not covered by the thin formula")


# ---------------------------------------------------------------------------
# text format


def parse_complex(text: str) -> tuple[CfkComplex, Involution]:
    """Read ``gen <name> <delta>``, ``d <from> <U-exp> <to>`` and ``iota <from> <U-exp> <to>`` lines."""
    names: list[str] = []
    gradings: list[int] = []
    index: dict[str, int] = {}
    d_lines: list[tuple[int, str, str, str]] = []
    i_lines: list[tuple[int, str, str, str]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kind = parts[0]
        try:
            if kind == "gen" and len(parts) == 3:
                if parts[1] in index:
                    raise ComplexFormatError(f"line {lineno}: generator {parts[1]} declared twice")
                index[parts[1]] = len(names)
                names.append(parts[1])
                gradings.append(int(parts[2]))
            elif kind in ("d", "iota") and len(parts) == 4:
                (d_lines if kind == "d" else i_lines).append((lineno, parts[1], parts[2], parts[3]))
            else:
                raise ComplexFormatError(f"line {lineno}: cannot parse {raw.strip()!r}")
        except ValueError as exc:
            raise ComplexFormatError(f"line {lineno}: {exc}") from None

    def resolve(lines):
        out = []
        for lineno, src, exp, dst in lines:
            for g in (src, dst):
                if g not in index:
                    raise ComplexFormatError(f"line {lineno}: unknown generator {g}")
            try:
                e = int(exp)
            except ValueError:
                raise ComplexFormatError(f"line {lineno}: bad U exponent {exp!r}") from None
            out.append((index[src], e, index[dst]))
        return tuple(out)

    if not names:
        raise ComplexFormatError("no generators declared")
    if not i_lines:
        raise ComplexFormatError("the involution must be given explicitly with iota lines")
    C = CfkComplex(tuple(names), tuple(gradings), resolve(d_lines))
    iota = Involution(resolve(i_lines))
    _check_involution(C, iota)
    return C, iota


def load_complex(path: str | Path) -> tuple[CfkComplex, Involution]:
    return parse_complex(Path(path).read_text())
