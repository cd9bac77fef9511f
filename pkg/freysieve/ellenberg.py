"""
Explicit Ellenberg bound

Finds the first prime p (with p^2 >= 400) for which the lower bound of the
p-new contribution is positive and keeps rising over the next few primes.
The E^(3) bound is evaluated here; the other terms (bound1, E1, E2, E3, F2)
are plugged in through FREYSIEVE_ELLENBERG_TERMS as a "module:attribute" path.
"""
import importlib
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Tuple

import mpmath
from mpmath import mp, mpf
from sympy import nextprime, totient

from freysieve import config
from freysieve.errors import BoundNotFound, InvalidInput, MissingTermImplementation
from freysieve.logs import log_debug, log_stage

GUARD_DIGITS = 3
MIN_PRECISION = 38
TERM_NAMES = ("bound1", "E1", "E2", "E3", "F2")
FIRST_PRIME = 23  # smallest p with p^2 >= 400
CONFIRM_WINDOW = 3


@dataclass(frozen=True)
class BoundParams:
    q: int
    precision: int = MIN_PRECISION
    term_impls: Dict[str, Callable] = field(default_factory=dict)

    def __post_init__(self):
        if self.q < 1:
            raise InvalidInput(f"character conductor must be positive, got {self.q}")
        if self.precision < MIN_PRECISION:
            raise InvalidInput(f"precision must be at least {MIN_PRECISION} digits, got {self.precision}")

    @property
    def sigma(self) -> mpf:
        return mpf(self.q) ** 2 / (2 * mp.pi)

    @property
    def working_dps(self) -> int:
        return self.precision + GUARD_DIGITS


@dataclass(frozen=True)
class BoundReport:
    q: int
    first_positive_prime: int
    rhs_trace: List[Tuple[int, str]]
    precision: int
    confirmed: List[Tuple[int, str]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "q": self.q,
            "first_positive_prime": self.first_positive_prime,
            "precision": self.precision,
            "rhs_trace": [{"p": p, "rhs": v} for p, v in self.rhs_trace],
            "confirmed": [{"p": p, "rhs": v} for p, v in self.confirmed],
        }


def load_term_impls(path: Optional[str] = None) -> Dict[str, Callable]:
    """
    Import the reference terms from "package.module:attribute". The attribute
    is a dict or an object exposing bound1, E1, E2, E3 and F2.
    """
    path = config.settings.ellenberg_terms if path is None else path
    if not path:
        return {}
    module_name, _, attr = path.partition(":")
    try:
        target = importlib.import_module(module_name)
        if attr:
            target = getattr(target, attr)
    except (ImportError, AttributeError) as e:
        raise MissingTermImplementation(
            f"cannot load Ellenberg terms from {path!r}: {e}",
            hint="FREYSIEVE_ELLENBERG_TERMS must look like package.module:attribute",
        )
    if isinstance(target, dict):
        return {name: target[name] for name in TERM_NAMES if name in target}
    return {name: getattr(target, name) for name in TERM_NAMES if hasattr(target, name)}


@lru_cache(maxsize=None)
def zeta_three_halves(dps: int) -> mpf:
    with mp.workdps(dps):
        return +mpmath.zeta(mpf(3) / 2)


def divisor_sum_partial(p: int, dps: int) -> mpf:
    """
    sum_{k <= p^2} tau(k) / k^(3/2), as sum over a*b <= p^2 of (ab)^(-3/2)
    with the hyperbola split at a, b <= p.
    """
    with mp.workdps(dps):
        s = mpf(3) / 2
        z = zeta_three_halves(dps)
        n = p * p
        head = mpf(0)
        total = mpf(0)
        for a in range(1, p + 1):
            weight = mpf(a) ** (-s)
            head += weight
            # sum_{b <= n/a} b^(-s) = zeta(s) - zeta(s, floor(n/a) + 1)
            total += weight * (z - mpmath.zeta(s, n // a + 1))
        return 2 * total - head * head


def eval_E4(p: int, q: int, precision: int = MIN_PRECISION) -> mpf:
    """
    16 pi^3 ( 12 phi(q) log^2 p / (pi p^2)
              + q^2 log(p^2) / (4 pi p) (zeta(3/2)^2 - sum_{k<=p^2} tau(k)/k^(3/2)) )
    """
    if p < 2:
        raise InvalidInput(f"p must be at least 2, got {p}")
    dps = precision + GUARD_DIGITS
    with mp.workdps(dps):
        pi = +mp.pi
        logp = mpmath.log(p)
        first = 12 * int(totient(q)) * logp ** 2 / (pi * mpf(p) ** 2)
        bracket = zeta_three_halves(dps) ** 2 - divisor_sum_partial(p, dps)
        second = mpf(q) ** 2 * mpmath.log(mpf(p) ** 2) / (4 * pi * p) * bracket
        return 16 * pi ** 3 * (first + second)


def leading_term(p: int, q: int, dps: int) -> mpf:
    with mp.workdps(dps):
        return 4 * mp.pi * mpmath.exp(-2 * mp.pi ** 2 / (mpf(p) ** 2 * q * mpmath.log(p)))


def _term(params: BoundParams, name: str) -> Callable:
    impl = params.term_impls.get(name)
    if impl is None:
        raise MissingTermImplementation(
            f"Ellenberg term {name} is not installed",
            hint="set FREYSIEVE_ELLENBERG_TERMS to a module providing bound1, E1, E2, E3 and F2",
        )
    return impl


def eval_rhs(p: int, q: int, params: BoundParams) -> mpf:
    """
    F(p,q) - F2(p,q,p)/(p^2-1) - p*F2(p,q,1)/(p^2-1) with
    F(p,q) = 4 pi exp(-2 pi^2 / (p^2 q log p)) - E4 - E3 - E2 - E1 - bound1

    Raises:
        MissingTermImplementation: a reference term is not installed
    """
    bound1, E1, E2, E3, F2 = (_term(params, name) for name in TERM_NAMES)
    dps = params.working_dps
    with mp.workdps(dps):
        F = (leading_term(p, q, dps) - eval_E4(p, q, params.precision)
             - mpf(E3(p, q)) - mpf(E2(p, q)) - mpf(E1(p, q)) - mpf(bound1(p, q)))
        denom = mpf(p) ** 2 - 1
        return F - mpf(F2(p, q, p)) / denom - p * mpf(F2(p, q, 1)) / denom


def is_positive(value: mpf, precision: int) -> bool:
    return value > mpf(10) ** (GUARD_DIGITS - precision)


def confirm_rise(p: int, value: mpf, q: int, params: BoundParams) -> Tuple[List[Tuple[int, str]], Optional[int]]:
    """
    Evaluate the CONFIRM_WINDOW primes after p. Returns the window trace and
    the first prime where the right-hand side is non-positive or drops, if any.
    """
    tolerance = mpf(10) ** (GUARD_DIGITS - params.precision)
    window: List[Tuple[int, str]] = []
    previous, current = value, p
    for _ in range(CONFIRM_WINDOW):
        current = int(nextprime(current))
        following = eval_rhs(current, q, params)
        window.append((current, mpmath.nstr(following, 20)))
        if not is_positive(following, params.precision) or following < previous - tolerance:
            return window, current
        previous = following
    return window, None


def find_bound(q: int, params: BoundParams, max_prime: Optional[int] = None) -> BoundReport:
    """
    First prime p >= 23 with a positive right-hand side that keeps rising
    (positive and non-decreasing) over the next CONFIRM_WINDOW primes. A
    positive value followed by a drop is rejected and the scan resumes after
    the offending prime.

    Raises:
        BoundNotFound: no such prime up to max_prime
    """
    limit = max_prime or config.settings.ellenberg_max_prime
    trace: List[Tuple[int, str]] = []
    log_stage("Ellenberg", f"q={q}: scanning primes {FIRST_PRIME}..{limit} at {params.precision} digits")
    p = FIRST_PRIME
    while p <= limit:
        value = eval_rhs(p, q, params)
        trace.append((p, mpmath.nstr(value, 20)))
        log_debug("Ellenberg", f"p={p}: rhs = {mpmath.nstr(value, 12)}")
        if is_positive(value, params.precision):
            window, broken = confirm_rise(p, value, q, params)
            if broken is None:
                log_stage("Ellenberg", f"q={q}: first positive prime {p}, rising through {window[-1][0]}")
                return BoundReport(q, p, trace, params.precision, window)
            log_stage("Ellenberg", f"⚠️ q={q}: rhs positive at {p} but not at {broken}; scanning on")
            trace.extend(window)
            p = broken
        p = int(nextprime(p))
    raise BoundNotFound(
        f"right-hand side stays non-positive for q={q} up to p={limit}",
        hint="raise FREYSIEVE_ELLENBERG_MAX_PRIME",
    )
