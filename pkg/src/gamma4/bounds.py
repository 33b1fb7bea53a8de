"""Certified intervals for the smooth and topological nonorientable 4-ball genus."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Callable, Iterable, Optional

from gamma4 import classical, floer
from gamma4.arith import DEFAULT_MAX_FACTOR_DIGITS, Factorization
from gamma4.errors import InternalError, ValidationError
from gamma4.topobstruct import Verdict, lf_mobius_obstructed
from gamma4.torusknot import TorusKnot, pinch_sequence, stretch

LOWER, UPPER = "lower", "upper"
SMOOTH, TOPOLOGICAL = "smooth", "topological"


@dataclass(frozen=True)
class BoundCertificate:
    name: str
    value: int
    direction: str  # lower or upper
    citation: str
    scope: str = SMOOTH  # smooth certificates bound gamma_4, topological ones gamma_4^top
    detail: str = ""


@dataclass(frozen=True)
class Interval:
    lo: int
    hi: int

    @property
    def exact(self) -> bool:
        return self.lo == self.hi

    def as_list(self) -> list[int]:
        return [self.lo, self.hi]


@dataclass(frozen=True)
class BoundReport:
    knot: TorusKnot
    smooth: Interval
    topological: Interval
    certificates: tuple[BoundCertificate, ...]
    unavailable: tuple[str, ...] = ()
    calibration_ok: Optional[bool] = None


@dataclass(frozen=True)
class BoundOptions:
    use_floer: bool = True
    use_linkform: bool = True
    max_factor_digits: int = DEFAULT_MAX_FACTOR_DIGITS
    literature_path: Optional[str] = None


# ---------------------------------------------------------------------------
# literature table


@dataclass(frozen=True)
class LiteratureFact:
    p: int
    q: int
    direction: str  # lower, upper or exact
    value: int
    citation: str


@dataclass(frozen=True)
class FamilyFact:
    citation: str
    shape: str
    direction: str
    parity: str


def _longo_square(K: TorusKnot) -> Optional[tuple[int, int]]:
    for a, b in ((K.p, K.q), (K.q, K.p)):
        if a % 4 == 0 and a >= 8:
            n = a // 4
            if b in ((2 * n + 1) ** 2, (2 * n - 1) ** 2):
                return n, 2 * n - 1
    return None


def _tairi(K: TorusKnot) -> Optional[tuple[int, int]]:
    for a, b in ((K.p, K.q), (K.q, K.p)):
        twice_n = 3 * a - b - 1
        if twice_n < 0 or twice_n % 2:
            continue
        n = twice_n // 2
        rest = a - 2 - 4 * n
        if rest < 0 or rest % 2:
            continue
        m = rest // 2
        if m >= 2 and 4 * n + 2 * m + 2 == a and 10 * n + 6 * m + 5 == b:
            return n, m
    return None


def _batson_adjacent(K: TorusKnot) -> Optional[tuple[int, int]]:
    for a, b in ((K.p, K.q), (K.q, K.p)):
        if a % 2 == 0 and a >= 4 and b == a - 1:
            return a // 2, a // 2 - 1
    return None


FAMILY_SHAPES: dict[str, Callable[[TorusKnot], Optional[tuple[int, int]]]] = {
    "longo-square": _longo_square,
    "tairi": _tairi,
    "batson-adjacent": _batson_adjacent,
}


@dataclass(frozen=True)
class LiteratureTable:
    version: int
    facts: tuple[LiteratureFact, ...]
    families: tuple[FamilyFact, ...]

    def lookup(self, K: TorusKnot) -> list[tuple[str, int, str]]:
        """(direction, value, citation) for every statement covering K."""
        out = []
        for f in self.facts:
            if TorusKnot(f.p, f.q) == K:
                out.append((f.direction, f.value, f.citation))
        for fam in self.families:
            hit = FAMILY_SHAPES[fam.shape](K)
            if hit is None:
                continue
            n, value = hit
            if fam.parity == "even" and n % 2 or fam.parity == "odd" and n % 2 == 0:
                continue
            out.append((fam.direction, value, f"{fam.citation} ({fam.shape}, n={n})"))
        return out


def parse_literature(text: str) -> LiteratureTable:
    version, facts, families = 0, [], []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "version" and len(parts) == 2:
                version = int(parts[1])
            elif parts[0] == "fact" and len(parts) == 6:
                p, q, direction, value, key = int(parts[1]), int(parts[2]), parts[3], int(parts[4]), parts[5]
                if direction not in ("lower", "upper", "exact") or math.gcd(p, q) != 1:
                    raise ValueError("bad direction or non-coprime pair")
                facts.append(LiteratureFact(p, q, direction, value, key))
            elif parts[0] == "family" and len(parts) == 5:
                key, shape, direction, parity = parts[1:]
                if shape not in FAMILY_SHAPES or direction not in ("lower", "upper", "exact"):
                    raise ValueError(f"unknown family shape or direction in {line!r}")
                if parity not in ("any", "even", "odd"):
                    raise ValueError(f"bad parity {parity!r}")
                families.append(FamilyFact(key, shape, direction, parity))
            else:
                raise ValueError(f"cannot parse {line!r}")
        except ValueError as exc:
            raise ValidationError(f"literature table line {lineno}: {exc}") from None
    return LiteratureTable(version, tuple(facts), tuple(families))


@lru_cache(maxsize=8)
def load_literature(path: Optional[str] = None) -> LiteratureTable:
    if path is None:
        text = resources.files("gamma4").joinpath("data/literature.facts").read_text()
    else:
        text = Path(path).read_text()
    return parse_literature(text)


# ---------------------------------------------------------------------------
# calibration of the Floer engine


@dataclass(frozen=True)
class Calibration:
    ok: bool
    failures: tuple[str, ...] = ()


@lru_cache(maxsize=1)
def floer_calibration() -> Calibration:
    """Check the grading convention against known values before trusting Floer bounds."""
    failures = []
    if floer.upsilon(TorusKnot(1, 1)) != 0:
        failures.append("upsilon(unknot) != 0")
    for q in range(3, 100, 2):
        if floer.upsilon(TorusKnot(4, q)) != -(q - 1):
            failures.append(f"upsilon(T(4,{q})) != {-(q - 1)}")
    fig8 = resources.files("gamma4").joinpath("fixtures/figure8.cfk").read_text()
    C, iota = floer.parse_complex(fig8)
    s = floer.involutive_upsilons(C, iota)
    if (s.upsilon, s.upsilon_bar, s.upsilon_underbar) != (0, 1, -1):
        failures.append("figure-eight involutive upsilons != (0, 1, -1)")
    return Calibration(not failures, tuple(failures))


# ---------------------------------------------------------------------------
# individual certificates


def floor_certificate(K: TorusKnot) -> BoundCertificate:
    return BoundCertificate("floor", 1, LOWER, "definition: nonorientable surfaces have b1 >= 1")


def pinch_upper_bound(K: TorusKnot) -> BoundCertificate:
    theta = len(pinch_sequence(K))
    # a slice knot still needs a Mobius band, so the bound is never below 1
    return BoundCertificate("pinch-upper", max(theta, 1), UPPER, "pinch moves", detail=f"theta={theta}")


def stretch_lower_bound(K: TorusKnot) -> Optional[BoundCertificate]:
    k = stretch(K)
    if k is None or k < 2:
        return None
    if k - 1 >= 2:
        return BoundCertificate("stretch-general", k - 1, LOWER, "stretch bound", detail=f"k={k}")
    return BoundCertificate("stretch-mobius", 2, LOWER, "stretch excludes a Mobius band", detail=f"k={k}")


def oss_lower_bound(K: TorusKnot, ups: Optional[int] = None) -> BoundCertificate:
    if ups is None:
        ups = floer.upsilon(K)
    sig = classical.signature(K)
    return BoundCertificate(
        "oss", abs(ups - sig // 2), LOWER, "|upsilon - sigma/2|", detail=f"upsilon={ups}, sigma={sig}"
    )


def yasuhara_lower_bound(K: TorusKnot) -> Optional[BoundCertificate]:
    rec = classical.yasuhara_obstruction(K)
    if not rec.mobius_parity_obstructed:
        return None
    return BoundCertificate(
        "yasuhara", 2, LOWER, "sigma + 4 Arf parity", detail=f"class={rec.yasuhara_class}"
    )


def involutive_certificates(summary: floer.HfkiSummary) -> list[BoundCertificate]:
    ub, u, lb = summary.upsilon_bar, summary.upsilon, summary.upsilon_underbar
    detail = f"upsilon_bar={ub}, upsilon={u}, upsilon_underbar={lb}"
    certs = [
        BoundCertificate("involutive-bar", ub - u - 1, LOWER, "upsilon_bar - upsilon - 1", detail=detail),
        BoundCertificate("involutive-underbar", u - lb - 1, LOWER, "upsilon - upsilon_underbar - 1", detail=detail),
        BoundCertificate("involutive-gap", ub - lb - 2, LOWER, "upsilon_bar - upsilon_underbar - 2", detail=detail),
    ]
    if ub - lb >= 2:
        certs.append(
            BoundCertificate("involutive-mobius", 2, LOWER, "upsilon_bar - upsilon_underbar >= 2", detail=detail)
        )
    return certs


def involutive_lower_bounds(K: TorusKnot) -> list[BoundCertificate]:
    C, iota = floer.staircase(K)
    return involutive_certificates(floer.involutive_upsilons(C, iota, with_towers=False))


def lf_residue_bound(
    K: TorusKnot, max_digits: int = DEFAULT_MAX_FACTOR_DIGITS, factorization: Optional[Factorization] = None
) -> Optional[BoundCertificate]:
    res = lf_mobius_obstructed(K, max_digits, factorization)
    if res.verdict != Verdict.OBSTRUCTED:
        return None
    return BoundCertificate(
        "lf-residue", 2, LOWER, "linking form residue obstruction", scope=TOPOLOGICAL, detail=res.reason
    )


def _four_strand_q(K: TorusKnot) -> Optional[int]:
    for a, b in ((K.p, K.q), (K.q, K.p)):
        if a == 4 and b % 2 == 1 and b > 1:
            return b
    return None


# sigma(T_{-4,q})/2 - d(S^3_{-1}(T_{-4,q})) by q mod 8
_BATSON_FOUR_STRAND = {1: 0, 3: 1, 5: -2, 7: -1}


def batson_d_bound(K: TorusKnot) -> Optional[BoundCertificate]:
    q = _four_strand_q(K)
    if q is None:
        return None
    return BoundCertificate(
        "batson-d", _BATSON_FOUR_STRAND[q % 8], LOWER, "four-strand d-invariant table", detail=f"q mod 8 = {q % 8}"
    )


def literature_certificates(K: TorusKnot, table: LiteratureTable) -> list[BoundCertificate]:
    certs = []
    for direction, value, cite in table.lookup(K):
        if direction in ("lower", "exact"):
            certs.append(BoundCertificate("literature", value, LOWER, cite))
        if direction in ("upper", "exact"):
            certs.append(BoundCertificate("literature", value, UPPER, cite))
    # pinch reduction: j pinch moves to a knot with gamma_4 <= v give gamma_4 <= v + j
    for j, step in enumerate(pinch_sequence(K), 1):
        for direction, value, cite in table.lookup(step.target):
            if direction in ("upper", "exact"):
                certs.append(
                    BoundCertificate(
                        "literature",
                        value + j,
                        UPPER,
                        cite,
                        detail=f"{j} pinch move(s) to {step.target}",
                    )
                )
    return certs


# ---------------------------------------------------------------------------
# aggregation


def aggregate(certs: Iterable[BoundCertificate], scope: str) -> Interval:
    """Interval for ``scope`` from the certificates, with the floor of 1.

    gamma_4^top <= gamma_4, so every smooth upper bound is a topological upper
    bound and every topological lower bound is a smooth lower bound.
    """
    lo, hi = 1, None
    for c in certs:
        if c.direction == LOWER and (c.scope == scope or c.scope == TOPOLOGICAL):
            lo = max(lo, c.value)
        elif c.direction == UPPER and (c.scope == scope or c.scope == SMOOTH):
            hi = c.value if hi is None else min(hi, c.value)
    if hi is None:
        raise InternalError("no upper bound certificate")
    return Interval(lo, hi)


def collect_certificates(
    K: TorusKnot,
    options: BoundOptions = BoundOptions(),
    summary: Optional[floer.HfkiSummary] = None,
    factorization: Optional[Factorization] = None,
) -> tuple[list[BoundCertificate], list[str], Optional[bool]]:
    """All certificates for K; ``summary`` and ``factorization`` may come from a cache."""
    certs = [floor_certificate(K), pinch_upper_bound(K)]
    unavailable: list[str] = []
    calibration_ok: Optional[bool] = None
    table = load_literature(options.literature_path)
    if not K.is_unknot:
        for maybe in (stretch_lower_bound(K), yasuhara_lower_bound(K), batson_d_bound(K)):
            if maybe is not None:
                certs.append(maybe)
        if options.use_floer:
            calibration_ok = floer_calibration().ok
            if calibration_ok:
                if summary is None:
                    C, iota = floer.staircase(K)
                    summary = floer.involutive_upsilons(C, iota, with_towers=False)
                certs.append(oss_lower_bound(K, summary.upsilon))
                certs.extend(involutive_certificates(summary))
            else:
                unavailable.append("floer calibration failed: oss and involutive bounds withheld")
        else:
            unavailable.append("floer bounds skipped")
        if options.use_linkform:
            maybe = lf_residue_bound(K, options.max_factor_digits, factorization)
            if maybe is not None:
                certs.append(maybe)
        else:
            unavailable.append("linking form obstruction skipped")
    certs.extend(literature_certificates(K, table))
    return certs, unavailable, calibration_ok


def bound_report(
    K: TorusKnot,
    options: BoundOptions = BoundOptions(),
    summary: Optional[floer.HfkiSummary] = None,
    factorization: Optional[Factorization] = None,
) -> BoundReport:
    certs, unavailable, calibration_ok = collect_certificates(K, options, summary, factorization)
    smooth = aggregate(certs, SMOOTH)
    top = aggregate(certs, TOPOLOGICAL)
    for name, iv in ((SMOOTH, smooth), (TOPOLOGICAL, top)):
        if iv.lo > iv.hi:
            raise InternalError(f"{name} certificates for {K} are inconsistent: {iv}")
    if top.hi > smooth.hi:
        raise InternalError("topological upper bound exceeds the smooth one")
    return BoundReport(K, smooth, top, tuple(certs), tuple(unavailable), calibration_ok)


def smooth_bounds(K: TorusKnot, options: BoundOptions = BoundOptions()) -> BoundReport:
    return bound_report(K, options)


def topological_bounds(K: TorusKnot, options: BoundOptions = BoundOptions()) -> BoundReport:
    return bound_report(K, options)


def verify_certificate(K: TorusKnot, cert: BoundCertificate, options: BoundOptions = BoundOptions()) -> bool:
    """Recompute the certificate from its source module and compare."""
    name = cert.name
    if name == "floor":
        fresh = [floor_certificate(K)]
    elif name == "pinch-upper":
        fresh = [pinch_upper_bound(K)]
    elif name in ("stretch-mobius", "stretch-general"):
        fresh = [stretch_lower_bound(K)]
    elif name == "oss":
        fresh = [oss_lower_bound(K)]
    elif name == "yasuhara":
        fresh = [yasuhara_lower_bound(K)]
    elif name.startswith("involutive-"):
        fresh = involutive_lower_bounds(K)
    elif name == "lf-residue":
        fresh = [lf_residue_bound(K, options.max_factor_digits)]
    elif name == "batson-d":
        fresh = [batson_d_bound(K)]
    elif name == "literature":
        fresh = literature_certificates(K, load_literature(options.literature_path))
    else:
        raise ValidationError(f"unknown certificate {name!r}")
    return cert in [c for c in fresh if c is not None]
