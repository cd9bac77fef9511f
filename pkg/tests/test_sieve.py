from fractions import Fraction
from math import gcd

import pytest
from sympy import primefactors

from freysieve.arith import NumberFieldElem, residue_field, splitting_type, sqrt_minus_d, primes_above
from freysieve.errors import HypothesisViolated, InvariantViolation, MissingEigenvalue
from freysieve.sieve import (
    CM_FLAGGED, ELIMINATED, SURVIVES, NewformData, SieveConfig, base_change_coeff,
    enumerate_local_solutions, frey_reduction, sieve_constant, sieve_survivors,
)
from test_ecurve import brute_trace

RATIONAL = (1, 0)


def rational_form(label, level, a, eps, char_order=2, cm=None):
    return NewformData(
        label=label, level=level, char_order=char_order, field_poly=RATIONAL,
        a_map={ell: NumberFieldElem(RATIONAL, (Fraction(v),)) for ell, v in a.items()},
        eps_map={ell: NumberFieldElem(RATIONAL, (Fraction(v),)) for ell, v in eps.items()},
        cm=cm,
    )


def oracle_constant(d, ell, a, eps, n):
    """B_ell from every pair (A, B), traces counted by brute force"""
    P = splitting_type(ell, d)
    field = residue_field(P)
    roots = [I.reduce(sqrt_minus_d(d)) for I in primes_above(P)]
    factors = set()
    for A in field.elements():
        for B in field.elements():
            if A.is_zero() and B.is_zero():
                continue
            if (A * A + d * B ** 6).is_zero():
                value = abs(eps * a * a - (ell + 1) ** 2)
            else:
                value = 0
                for u in roots:
                    t = brute_trace(frey_reduction(d, A, B, u))
                    value = gcd(value, abs(a ** n - t ** n))
            if value == 0:
                return 0
            factors.add(value)
    out = ell
    for x in factors:
        out *= x
    return out


D19_EPS = {5: -1, 7: 1, 11: -1, 17: -1}


def test_sieve_constant_matches_oracle():
    cfg = SieveConfig(19, 2, (5, 7), 19)
    f = rational_form("test/1", 4332, {5: 2, 7: -1}, D19_EPS)
    for ell in (5, 7):
        a = int(f.a_map[ell].coords[0])
        assert sieve_constant(f, cfg, ell).value == oracle_constant(19, ell, a, D19_EPS[ell], 2)
    assert sieve_constant(f, cfg, 5).value == 4000


def test_mismatched_survivors_are_the_gcd_support():
    cfg = SieveConfig(19, 2, (5, 7), 19)
    f = rational_form("test/2", 4332, {5: 2, 7: -1}, D19_EPS)
    expected = gcd(oracle_constant(19, 5, 2, -1, 2), oracle_constant(19, 7, -1, 1, 2))
    outcome = sieve_survivors(f, cfg)
    assert outcome.surviving_primes == sorted(primefactors(expected))
    assert outcome.verdict == ELIMINATED


def test_planted_frey_trace_is_never_eliminated():
    # a_5 = 3 equals the trace of some local datum at both primes above 5
    cfg = SieveConfig(19, 2, (5,), 19)
    f = rational_form("test/3", 4332, {5: 3}, D19_EPS)
    assert sieve_constant(f, cfg, 5).value == 0
    outcome = sieve_survivors(f, cfg)
    assert outcome.surviving_primes is None
    assert outcome.verdict == SURVIVES


def test_local_solutions_count():
    P = splitting_type(5, 7)
    assert len(enumerate_local_solutions(7, P)) == 25 * 25 - 1
    with pytest.raises(HypothesisViolated):
        enumerate_local_solutions(7, splitting_type(7, 7))


def test_base_change_at_inert_prime():
    f = rational_form("test/4", 294, {5: 2}, {5: -1})
    assert base_change_coeff(f, splitting_type(5, 7)) == 4 + 10
    with pytest.raises(MissingEigenvalue):
        base_change_coeff(f, splitting_type(11, 7))


def test_config_rejects_ramified_and_dividing_primes():
    with pytest.raises(HypothesisViolated):
        SieveConfig(19, 2, (19,), 19).check(4332)
    with pytest.raises(HypothesisViolated):
        SieveConfig(7, 2, (3,), 7).check(294)


def test_validate_rejects_bad_character_and_hecke_bound():
    with pytest.raises(InvariantViolation):
        rational_form("bad/1", 294, {11: 0}, {11: 2}).validate()
    with pytest.raises(InvariantViolation):
        rational_form("bad/2", 294, {11: 7}, {11: 1}).validate()


def test_d7_synthetic_verdicts(d7_case, d7_forms):
    by_label = {f.label: f for f in d7_forms}

    def outcome(label):
        f = by_label[label]
        return sieve_survivors(f, d7_case.sieve_config(f.level))

    assert outcome("294/2").verdict == ELIMINATED
    assert outcome("294/1").verdict == SURVIVES
    assert outcome("588/1").verdict == CM_FLAGGED
