import math
import random
from pathlib import Path

import pytest

from gamma4.errors import (
    ComplexFormatError,
    ConstantTermPlusOne,
    NotAComplex,
    NotCovered,
    NotStaircase,
    StructureViolation,
)
from gamma4.floer import (
    CfkComplex,
    Involution,
    first_gap,
    homology,
    involutive_upsilons,
    involutive_upsilons_lspace,
    load_complex,
    localized_rank,
    mapping_cone,
    parse_complex,
    staircase,
    staircase_exponents,
    thin_knot_upsilons,
    upsilon,
)
from gamma4.torusknot import UNKNOT, LaurentPoly, TorusKnot, genus, semigroup, stretch

FIXTURE = Path(__file__).resolve().parents[1] / "fixtures" / "figure8.cfk"


def semigroup_upsilon(K):
    """Independent oracle: upsilon at t = 1 from the semigroup counting function."""
    g = genus(K)
    S = semigroup(K)
    best, count = None, 0
    for m in range(0, 2 * g + 1):
        value = m - g - 2 * count
        best = value if best is None else max(best, value)
        if m in S:
            count += 1
    return best


def small_knots(limit=12):
    return [
        TorusKnot(p, q)
        for p in range(2, limit + 1)
        for q in range(p + 1, limit + 1)
        if math.gcd(p, q) == 1
    ]


def identity(C):
    return Involution(tuple((k, 0, k) for k in range(C.size)))


def random_gaps(rng):
    m = rng.randrange(1, 7)
    gaps, g = [], 0
    for _ in range(m):
        g += rng.randrange(1, 4)
        gaps.append(g)
    return gaps


def test_staircase_examples():
    C, iota = staircase(UNKNOT)
    assert C.size == 1 and C.gradings == (0,) and C.differential == ()
    assert iota.entries == ((0, 0, 0),)
    assert staircase(TorusKnot(2, 3))[0].size == 3
    C, _ = staircase(TorusKnot(4, 5))
    assert C.size == 7
    assert C.names[3] == "x0"
    assert staircase_exponents(LaurentPoly.from_dict({-6: 1, -5: -1, -2: 1, 0: -1, 2: 1, 5: -1, 6: 1})) == [
        6, 5, 2, 0, -2, -5, -6
    ]


def test_staircase_rejects_non_lspace_shape():
    with pytest.raises(NotStaircase):
        staircase_exponents(LaurentPoly.from_dict({-1: -1, 0: 3, 1: -1}))
    with pytest.raises(NotStaircase):
        staircase([2, 2])


def test_homology_examples():
    assert homology(staircase(UNKNOT)[0]).towers == (0,)
    h = homology(staircase(TorusKnot(2, 3))[0])
    assert h.towers == (-1,) and upsilon(TorusKnot(2, 3)) == -1


def test_homology_rejects_non_complex():
    with pytest.raises(NotAComplex):
        CfkComplex(("a", "b", "c"), (0, -1, -2), ((0, 0, 1), (1, 0, 2)))
    with pytest.raises(NotAComplex):
        CfkComplex(("a", "b"), (0, 0), ((0, 0, 1),))


def test_upsilon_examples():
    assert upsilon(UNKNOT) == 0
    assert upsilon(TorusKnot(4, 9)) == -8
    assert upsilon(TorusKnot(4, 7)) == -6


def test_upsilon_four_strands_calibration():
    for q in range(3, 100, 2):
        assert upsilon(TorusKnot(4, q)) == -(q - 1)


@pytest.mark.parametrize("K", small_knots(), ids=str)
def test_upsilon_matches_semigroup_oracle(K):
    assert upsilon(K) == semigroup_upsilon(K)


def test_figure_eight_fixture():
    C, iota = load_complex(FIXTURE)
    s = involutive_upsilons(C, iota)
    assert (s.upsilon, s.upsilon_bar, s.upsilon_underbar) == (0, 1, -1)
    # the inverse involution gives the same invariants; here iota^2 != id
    inv = iota.inverse(C)
    assert inv != iota
    s2 = involutive_upsilons(C, inv)
    assert (s2.upsilon, s2.upsilon_bar, s2.upsilon_underbar) == (0, 1, -1)


def test_identity_involution_examples():
    C, _ = staircase(UNKNOT)
    s = involutive_upsilons(C, identity(C))
    assert (s.upsilon, s.upsilon_bar, s.upsilon_underbar) == (0, 0, 0)


def test_identity_involution_oracle_random_staircases():
    rng = random.Random(11)
    for _ in range(20):
        C, _ = staircase(random_gaps(rng))
        s = involutive_upsilons(C, identity(C))
        assert s.upsilon_bar == s.upsilon == s.upsilon_underbar


def test_lspace_examples():
    s = involutive_upsilons_lspace(TorusKnot(2, 3))
    assert s.upsilon_bar == s.upsilon and s.upsilon_bar - s.upsilon_underbar >= 1
    s = involutive_upsilons_lspace(TorusKnot(4, 7))
    assert s.upsilon_bar == -6 and s.upsilon_underbar <= -8
    with pytest.raises(ConstantTermPlusOne):
        involutive_upsilons_lspace(TorusKnot(4, 9))


@pytest.mark.parametrize("K", small_knots(), ids=str)
def test_structure_on_small_torus_knots(K):
    C, iota = staircase(K)
    assert localized_rank(C.unit_images()) == 1
    gradings, images = mapping_cone(C, iota)
    assert localized_rank(images) == 2
    h = homology(C)
    assert h.rank == 1 and h.rank + 2 * len(h.torsion) == C.size
    s = involutive_upsilons(C, iota)
    assert s.upsilon_bar >= s.upsilon >= s.upsilon_underbar
    assert len(s.cone_towers) == 2
    # iota squares to the identity on a staircase, and its inverse gives the same invariants
    assert iota.compose(iota, C) == identity(C)
    assert involutive_upsilons(C, iota.inverse(C)) == s
    if stretch(K) is not None:
        assert s.upsilon_bar == s.upsilon
        assert s.upsilon_bar - s.upsilon_underbar >= first_gap(K)
        assert first_gap(K) == stretch(K)


def test_thin_knot_formula():
    assert thin_knot_upsilons(0, 0) == (0, 0, 0)
    assert thin_knot_upsilons(-8, 1) == (1, 0, -1)
    with pytest.raises(NotCovered):
        thin_knot_upsilons(-2, 0)


def test_thin_formula_agrees_with_engine_on_figure_eight():
    C, iota = load_complex(FIXTURE)
    s = involutive_upsilons(C, iota)
    # figure-eight: sigma = 0, Arf = 1
    assert thin_knot_upsilons(0, 1) == (s.upsilon_bar, s.upsilon, s.upsilon_underbar)


def test_parser_errors():
    with pytest.raises(ComplexFormatError):
        parse_complex("gen a 0\n")
    with pytest.raises(ComplexFormatError):
        parse_complex("gen a 0\niota a 0 b\n")
    with pytest.raises(ComplexFormatError):
        parse_complex("gen a zero\niota a 0 a\n")
    with pytest.raises(ComplexFormatError):
        parse_complex("frobnicate\n")
    with pytest.raises(StructureViolation):
        # swaps two generators but does not commute with d
        parse_complex("gen a 0\ngen b -1\ngen c 0\nd a 0 b\niota a 0 c\niota c 0 a\niota b 0 b\n")


def test_parser_comments_and_blank_lines():
    C, iota = parse_complex("# unknot\n\ngen z 0   # lone generator\niota z 0 z\n")
    assert C.names == ("z",)
    assert involutive_upsilons(C, iota).upsilon == 0
