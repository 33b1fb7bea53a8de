import math

import pytest

from gamma4.arith import factorize
from gamma4.errors import Inapplicable, NeedsEvenP
from gamma4.topobstruct import (
    Verdict,
    density_experiment,
    lf_mobius_obstructed,
    obstructing_residues,
    prime_sieve,
)
from gamma4.torusknot import TorusKnot


def brute_obstructed(p, q):
    classes = obstructing_residues(p).classes
    return any(s % (2 * p) in classes for s, e in factorize(q).factors if e % 2)


def test_residue_examples():
    assert obstructing_residues(4).classes == (5,)
    r6 = obstructing_residues(6)
    assert r6.classes == (5,) and r6.witnesses[5] == (5, 17, 29)
    with pytest.raises(Inapplicable):
        obstructing_residues(8)
    with pytest.raises(NeedsEvenP):
        obstructing_residues(7)


def test_witness_independence_and_class_structure():
    for p in range(2, 51, 2):
        if math.isqrt(p // 2) ** 2 == p // 2:
            continue
        res = obstructing_residues(p)
        assert res.classes
        for r, primes in res.witnesses.items():
            assert len(set(primes)) == 3 and all(s % (2 * p) == r for s in primes)
        # brute-force residue search on every witness agrees with the class verdict
        for r, primes in res.witnesses.items():
            for s in primes:
                squares = {x * x % s for x in range(1, s)}
                half = p // 2
                nonres = (half % s not in squares) and (-half % s not in squares)
                assert nonres == (r in res.classes)
        assert res.flagged == ()


def test_verdict_examples():
    assert lf_mobius_obstructed(TorusKnot(4, 35)).verdict == Verdict.OBSTRUCTED
    assert lf_mobius_obstructed(TorusKnot(4, 25)).verdict == Verdict.NOT_OBSTRUCTED
    r = lf_mobius_obstructed(TorusKnot(13, 4))
    assert r.verdict == Verdict.OBSTRUCTED and r.witness_prime == 13
    assert lf_mobius_obstructed(TorusKnot(8, 13)).verdict == Verdict.INAPPLICABLE
    assert lf_mobius_obstructed(TorusKnot(3, 5)).verdict == Verdict.INAPPLICABLE


def test_four_strand_open_range():
    for q in range(3, 106, 2):
        v = lf_mobius_obstructed(TorusKnot(4, q)).verdict
        if q % 8 in (1, 3):
            assert (v == Verdict.OBSTRUCTED) == (q in (35, 65, 91, 105)), q


def test_squares_never_obstruct():
    for p in (4, 6, 10, 12, 14):
        for root in range(1, 120, 2):
            q = root * root
            if math.gcd(p, q) == 1:
                assert lf_mobius_obstructed(TorusKnot(p, q)).verdict == Verdict.NOT_OBSTRUCTED


def test_density_small_example_matches_brute_force():
    N = 100
    rep = density_experiment(4, N)
    obstructed = [q for q in range(1, N + 1) if q % 2 and brute_obstructed(4, q)]
    assert obstructed[:6] == [5, 13, 15, 29, 35, 37]
    assert {35, 65, 91} <= set(obstructed)
    assert rep.eligible == 50 and rep.obstructed == len(obstructed)


@pytest.mark.parametrize("p", [4, 6, 10, 12])
def test_density_counts_against_factorization(p):
    N = 3000
    rep = density_experiment(p, N)
    eligible = [q for q in range(1, N + 1) if math.gcd(p, q) == 1]
    assert rep.eligible == len(eligible)
    assert rep.obstructed == sum(brute_obstructed(p, q) for q in eligible)
    assert 0 <= rep.ratio <= 1 and rep.obstructed <= rep.eligible


def test_density_partitioning_is_invisible():
    a = density_experiment(6, 20_000)
    b = density_experiment(6, 20_000, jobs=2, chunks=7)
    assert (a.eligible, a.obstructed, a.ratio, a.mertens_estimate) == (
        b.eligible,
        b.obstructed,
        b.ratio,
        b.mertens_estimate,
    )


@pytest.mark.parametrize("p", [4, 6, 10, 12])
def test_density_ratio_nonincreasing(p):
    ratios = [density_experiment(p, N).ratio for N in (10**3, 10**4, 10**5)]
    assert ratios[0] >= ratios[1] >= ratios[2]
    assert density_experiment(p, 10**5).monotone is True


def test_density_inapplicable():
    with pytest.raises(Inapplicable):
        density_experiment(8, 1000)


def test_prime_sieve():
    flags = prime_sieve(100)
    assert [i for i in range(101) if flags[i]][:10] == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
    assert sum(prime_sieve(10**5)) == 9592
