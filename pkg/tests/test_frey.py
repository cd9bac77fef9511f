import random
from dataclasses import replace
from math import gcd

import pytest
from sympy import primerange

from freysieve import frey
from freysieve.arith import factor, is_squarefree
from freysieve.ecurve import invariants
from freysieve.errors import (
    DegenerateRadical, HypothesisViolated, IncompleteTable, InvalidInput, NotASolution, UnhandledCase,
)
from freysieve.formats import CurveTable, load_curve_table, parse_curve_table
from freysieve.frey import (
    NO_CM, SPECIAL_D2_CM, TRIVIAL_CM, admissible_conductors, cm_check, conductor_profile, frey_curve,
    frey_discriminant, granville_family, inertness_applies, j_sqrt_part, multifrey_curve,
    multifrey_search, multiplicative_prime_bound, verify_solution,
)
from conftest import D2_TABLE, D13_TABLE

SQUAREFREE_D = [d for d in range(1, 21) if is_squarefree(d)]


def test_verify_solution():
    sol = verify_solution(181, 1, 2, 7, 15)
    assert sol.primitive and sol.nontrivial
    with pytest.raises(NotASolution):
        verify_solution(1, 1, 1, 7, 3)
    with pytest.raises(InvalidInput):
        verify_solution(1, 0, 1, 4, 5)


@pytest.mark.parametrize("d", [1, 2, 7, 15])
def test_frey_discriminant_closed_form(d):
    for A in range(-4, 5):
        for B in range(-3, 4):
            if A == 0 and B == 0:
                continue
            assert invariants(frey_curve(A, B, d)).disc == frey_discriminant(A, B, d)


@pytest.mark.parametrize("d", [2, 5, 11])
def test_multifrey_invariants(d):
    for A in range(-5, 6):
        for B in range(-3, 4):
            if A == 0 and B == 0:
                continue
            inv = invariants(multifrey_curve(A, B, d))
            assert inv.c4 == -144 * d * B * B
            assert inv.c6 == -1728 * d * A
            assert inv.disc == -1728 * d * d * (A * A + d * B ** 6)


def test_j_sqrt_part_matches_j():
    E = frey_curve(3, 2, 7)
    assert invariants(E).j.y == j_sqrt_part(3, 2, 7)


def test_cm_vanishing_set_on_primitive_pairs():
    zeros = set()
    for d in SQUAREFREE_D:
        for A in range(-30, 31):
            for B in range(-30, 31):
                if A == 0:
                    continue
                vanishes = j_sqrt_part(A, B, d) == 0
                if vanishes and B and gcd(A, B) != 1:
                    with pytest.raises(HypothesisViolated):
                        cm_check(A, B, d)
                    continue
                assert vanishes == (cm_check(A, B, d) != NO_CM)
                if vanishes and B:
                    zeros.add((d, abs(A), abs(B)))
    assert zeros == {(2, 5, 1)}


def test_cm_check_labels():
    assert cm_check(5, 0, 7) == TRIVIAL_CM
    assert cm_check(5, 1, 2) == SPECIAL_D2_CM
    assert cm_check(-5, -1, 2) == SPECIAL_D2_CM
    assert cm_check(3, 1, 7) == NO_CM


def test_cm_check_rejects_pairs_outside_its_hypotheses():
    # 16*22^2 = 11*11*2^6
    with pytest.raises(HypothesisViolated, match="gcd 2"):
        cm_check(22, 2, 11)
    with pytest.raises(HypothesisViolated):
        cm_check(0, 1, 3)
    assert cm_check(0, 0, 3) == TRIVIAL_CM


def test_granville_family_is_never_primitive():
    rng = random.Random(7)
    primes = list(primerange(5, 32))
    for _ in range(200):
        u, v = rng.randint(1, 20), rng.randint(1, 5)
        d = rng.choice(SQUAREFREE_D)
        p = rng.choice(primes)
        sol = granville_family(u, v, d, p)
        assert not sol.primitive
        assert sol.A ** 2 + d * sol.B ** 6 == sol.C ** p


def test_granville_rejects_small_radical():
    with pytest.raises(DegenerateRadical):
        granville_family(0, 1, 1, 7)
    with pytest.raises(InvalidInput):
        granville_family(1, 1, 7, 9)


def test_admissible_conductors_cover_the_d2_hit():
    assert 1152 in admissible_conductors(2)


def test_conductor_profile_branches():
    open_ended = conductor_profile(7)
    assert open_ended.v2_options == frozenset(range(7))
    assert open_ended.v3_options == {2, 3}
    assert open_ended.additive_primes == {7}
    assert open_ended.nonminimal_at_2

    minimal = conductor_profile(7, a=1, b=0, p=5)
    assert minimal.v2_options == {2, 3, 4, 5, 6}
    assert not minimal.nonminimal_at_2

    with pytest.raises(UnhandledCase):
        conductor_profile(2 ** 6)


def test_multifrey_search_d2():
    hits = multifrey_search(2, load_curve_table(str(D2_TABLE)))
    assert [(h.label, h.x, h.y, h.m, h.primes) for h in hits] == [("1152.r2", 5, 1, 27, [3])]
    bound = multiplicative_prime_bound(2, load_curve_table(str(D2_TABLE)))
    assert bound.bound == 3 and bound.path == "table-search"


def test_multifrey_search_d13_is_empty(monkeypatch):
    table = load_curve_table(str(D13_TABLE))
    assert table.coverage == set(admissible_conductors(13))

    queried, factored = [], []
    covers = CurveTable.covers

    def recording_covers(self, conductor):
        queried.append(conductor)
        return covers(self, conductor)

    def recording_factor(n):
        factored.append(n)
        return factor(n)

    monkeypatch.setattr(CurveTable, "covers", recording_covers)
    monkeypatch.setattr(frey, "factor", recording_factor)
    bound = multiplicative_prime_bound(13, table)
    assert bound.bound is None and bound.hits == [] and bound.path == "table-search"
    assert set(admissible_conductors(13)) <= set(queried)
    # 1 + 13 and 25 + 13 for the rows at 1521 and 4563
    assert {14, 38} <= set(factored)

    assert inertness_applies(13)
    assert multiplicative_prime_bound(13).path == "inertness"

    with pytest.raises(IncompleteTable):
        multifrey_search(13, replace(table, coverage=table.coverage - {292032}))


def test_multifrey_search_skips_inadmissible_conductors():
    shifted = parse_curve_table(
        "# coverage: 36,72,108,144,216,432,1152,1153,3456\n"
        "label,conductor,a1,a2,a3,a4,a6\n"
        "moved,1153,0,0,0,6,20\n"
    )
    assert multifrey_search(2, shifted) == []


def test_multifrey_search_needs_coverage():
    assert not inertness_applies(7)
    with pytest.raises(IncompleteTable):
        multiplicative_prime_bound(7)
    with pytest.raises(IncompleteTable):
        multifrey_search(7, load_curve_table(str(D2_TABLE)))
