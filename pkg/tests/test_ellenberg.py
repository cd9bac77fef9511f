import os

import mpmath
import pytest
from mpmath import mp, mpf
from sympy import divisor_count, primerange, totient

from freysieve.ellenberg import (
    BoundParams, divisor_sum_partial, eval_E4, eval_rhs, find_bound, leading_term, load_term_impls,
)
from freysieve.errors import BoundNotFound, InvalidInput, MissingTermImplementation


def slow_E4(p, q, dps):
    with mp.workdps(dps):
        partial = mpf(0)
        for k in range(1, p * p + 1):
            partial += int(divisor_count(k)) / mpf(k) ** (mpf(3) / 2)
        zeta = mpmath.zeta(mpf(3) / 2)
        first = 12 * int(totient(q)) * mpmath.log(p) ** 2 / (mp.pi * p ** 2)
        second = mpf(q) ** 2 * mpmath.log(mpf(p) ** 2) / (4 * mp.pi * p) * (zeta ** 2 - partial)
        return 16 * mp.pi ** 3 * (first + second), partial


@pytest.mark.parametrize("p,q", [(23, 7), (29, 19), (31, 44)])
def test_eval_E4_matches_direct_sum(p, q):
    expected, partial = slow_E4(p, q, 60)
    with mp.workdps(60):
        assert abs(divisor_sum_partial(p, 60) - partial) < mpf(10) ** -50
        assert abs(eval_E4(p, q, 50) - expected) < abs(expected) * mpf(10) ** -40


def test_precision_floor():
    with pytest.raises(InvalidInput):
        BoundParams(7, precision=20)
    with pytest.raises(InvalidInput):
        BoundParams(0)


def test_missing_terms():
    assert load_term_impls("") == {}
    with pytest.raises(MissingTermImplementation):
        load_term_impls("freysieve.no_such_module:terms")
    with pytest.raises(MissingTermImplementation):
        eval_rhs(23, 7, BoundParams(7))


def cancelling_terms(rhs_at):
    """E1 cancels the leading term and E4, leaving rhs_at(p) as the right-hand side"""
    def E1(p, q):
        dps = mp.dps
        return leading_term(p, q, dps) - eval_E4(p, q, dps - 3) - rhs_at(p)

    def zero(*args):
        return 0

    return {"bound1": zero, "E1": E1, "E2": zero, "E3": zero, "F2": zero}


def step_at(switch_at):
    def rhs_at(p):
        return -1 if p < switch_at else 1
    return rhs_at


def test_find_bound_stops_at_first_positive_prime():
    params = BoundParams(7, term_impls=cancelling_terms(step_at(41)))
    report = find_bound(7, params, max_prime=100)
    assert report.first_positive_prime == 41
    assert [p for p, _ in report.rhs_trace] == [23, 29, 31, 37, 41]
    assert [p for p, _ in report.confirmed] == [43, 47, 53]


def test_rhs_keeps_rising_past_the_bound():
    params = BoundParams(7, term_impls=cancelling_terms(lambda p: p - 40))
    bound = find_bound(7, params, max_prime=100).first_positive_prime
    assert bound == 41
    values = [eval_rhs(p, 7, params) for p in primerange(bound, 100)]
    assert all(v > 0 for v in values)
    assert all(later >= earlier - mpf(10) ** -30 for earlier, later in zip(values, values[1:]))


def test_positive_value_followed_by_a_drop_is_rejected():
    def dip(p):
        if p < 41:
            return -1
        return {41: 1, 43: mpf(1) / 2}.get(p, 2)

    params = BoundParams(7, term_impls=cancelling_terms(dip))
    report = find_bound(7, params, max_prime=100)
    assert report.first_positive_prime == 47
    assert [p for p, _ in report.rhs_trace] == [23, 29, 31, 37, 41, 43, 47]

    sign_flip = BoundParams(7, term_impls=cancelling_terms(lambda p: 1 if p == 29 or p >= 37 else -1))
    assert find_bound(7, sign_flip, max_prime=100).first_positive_prime == 37


def test_find_bound_gives_up():
    params = BoundParams(7, term_impls=cancelling_terms(step_at(10 ** 6)))
    with pytest.raises(BoundNotFound):
        find_bound(7, params, max_prime=60)


# read at import: the autouse fixture clears the variable for every test
REFERENCE_TERMS = os.getenv("FREYSIEVE_ELLENBERG_TERMS", "")
REFERENCE_BOUNDS = {7: 337, 15: 743, 19: 1031, 20: 1033, 24: 1289, 44: 557, 52: 3491}


@pytest.mark.skipif(not REFERENCE_TERMS, reason="set FREYSIEVE_ELLENBERG_TERMS=package.module:attribute to run")
@pytest.mark.parametrize("q,bound", sorted(REFERENCE_BOUNDS.items()))
def test_reference_bounds(q, bound):
    impls = load_term_impls(REFERENCE_TERMS)
    assert find_bound(q, BoundParams(q, term_impls=impls)).first_positive_prime == bound
