"""
Frey curves attached to solutions of x^2 + d*y^6 = z^n

- the Q-curve E_{A,B} over K = Q(sqrt(-d)) and the rational multi-Frey curve
- solution checks, the CM classification and the Granville family
- conductor exponents of the multi-Frey curve and the curve-table search
  bounding p when C is supported on {2, 3}
"""
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, isqrt
from typing import Dict, FrozenSet, List, Optional

from sympy import isprime, primefactors

from freysieve.arith import QuadElem, factor, is_squarefree, sqrt_minus_d, valuation
from freysieve.ecurve import WeierstrassModel
from freysieve.errors import (
    DegenerateRadical, HypothesisViolated, IncompleteTable, InvalidInput, NotASolution, UnhandledCase,
)
from freysieve.logs import log_debug, log_stage

TRIVIAL_CM = "trivial-CM"
SPECIAL_D2_CM = "special-d2-CM"
NO_CM = "no-CM"

# Table of bounds on p when C is supported on {2, 3}; None means no such C
PUBLISHED_BOUNDS: Dict[int, Optional[int]] = {
    2: 3, 3: 2, 5: 2, 6: None, 7: 7, 10: None,
    11: 5, 13: None, 14: None, 15: 3, 17: 2, 19: None,
}


def _check_d(d: int) -> None:
    if d < 1 or not is_squarefree(d):
        raise InvalidInput(f"d must be a positive square-free integer, got {d}")


# ---------------------------------------------------------------------------
# Solutions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Solution:
    A: int
    B: int
    C: int
    d: int
    n: int
    primitive: bool
    nontrivial: bool

    def to_dict(self) -> dict:
        return {
            "A": str(self.A), "B": str(self.B), "C": str(self.C),
            "d": self.d, "n": self.n,
            "primitive": self.primitive, "nontrivial": self.nontrivial,
        }


def verify_solution(A: int, B: int, C: int, d: int, n: int) -> Solution:
    """
    Check A^2 + d*B^6 = C^n and classify the solution.

    Raises:
        NotASolution: the equation does not hold
    """
    _check_d(d)
    if n < 2:
        raise InvalidInput(f"exponent must be at least 2, got {n}")
    lhs = A * A + d * B ** 6
    rhs = C ** n
    if lhs != rhs:
        raise NotASolution(
            f"{A}^2 + {d}*{B}^6 = {lhs} but {C}^{n} = {rhs}",
        )
    return Solution(
        A=A, B=B, C=C, d=d, n=n,
        primitive=gcd(gcd(A, B), C) == 1,
        nontrivial=A * B * C != 0,
    )


# ---------------------------------------------------------------------------
# Frey curves
# ---------------------------------------------------------------------------

def frey_curve(A: int, B: int, d: int) -> WeierstrassModel:
    """E_{A,B}: y^2 + 6B*sqrt(-d)*x*y - 4d(A + B^3*sqrt(-d))*y = x^3 over K"""
    _check_d(d)
    if A == 0 and B == 0:
        raise InvalidInput("(A, B) = (0, 0) has no Frey curve")
    s = sqrt_minus_d(d)
    return WeierstrassModel.over_k([6 * B * s, 0, -4 * d * (A + B ** 3 * s), 0, 0], d)


def frey_discriminant(A: int, B: int, d: int) -> QuadElem:
    """Closed form -2^8 3^3 d^4 C^p (A + B^3 sqrt(-d))^2 with C^p = A^2 + d*B^6"""
    w = A + B ** 3 * sqrt_minus_d(d)
    return -6912 * d ** 4 * (A * A + d * B ** 6) * w * w


def j_sqrt_part(A: int, B: int, d: int) -> Fraction:
    """sqrt(-d)-coefficient of j(E_{A,B}): 864AB^3(2A^2-25dB^6)(16A^2-11dB^6)/C^{3p}"""
    cp = A * A + d * B ** 6
    if cp == 0:
        raise InvalidInput("A^2 + d*B^6 vanishes")
    t = B ** 3
    return Fraction(864 * A * t * (2 * A * A - 25 * d * t * t) * (16 * A * A - 11 * d * t * t), cp ** 3)


def multifrey_curve(A: int, B: int, d: int) -> WeierstrassModel:
    """Y^2 = X^3 + 3dB^2 X + 2dA over Q"""
    _check_d(d)
    return WeierstrassModel.over_q([0, 0, 0, 3 * d * B * B, 2 * d * A])


def cm_check(A: int, B: int, d: int) -> str:
    """
    Classify where the sqrt(-d)-part of j(E_{A,B}) vanishes.

    Returns:
        trivial-CM (B = 0), special-d2-CM for (d, |A|, |B|) = (2, 5, 1),
        no-CM otherwise

    Raises:
        HypothesisViolated: A = 0, or a vanishing factor at a pair that is
            not primitive
    """
    _check_d(d)
    if B == 0:
        return TRIVIAL_CM
    if A == 0:
        raise HypothesisViolated(f"cm_check needs A != 0, got ({A}, {B})",
                                 hint="A = 0 never comes from a primitive solution")
    t = B ** 3
    if (2 * A * A - 25 * d * t * t) * (16 * A * A - 11 * d * t * t) == 0:
        # for square-free d the only primitive zero is (2, 5, 1)
        if (d, abs(A), abs(B)) == (2, 5, 1):
            return SPECIAL_D2_CM
        raise HypothesisViolated(f"({A}, {B}) is not primitive: gcd {gcd(A, B)}")
    return NO_CM


def granville_family(u: int, v: int, d: int, p: int) -> Solution:
    """
    Non-primitive solution built from r = u^2 + d*v^6.

    Raises:
        DegenerateRadical: r is -1, 0 or 1
    """
    _check_d(d)
    if not isprime(p) or p <= 3:
        raise InvalidInput(f"p must be a prime greater than 3, got {p}")
    r = u * u + d * v ** 6
    if r in (-1, 0, 1):
        raise DegenerateRadical(f"r = u^2 + d*v^6 = {r} generates only trivial points")
    if p % 6 == 1:
        A, B, C = u * r ** ((p - 1) // 2), v * r ** ((p - 1) // 6), r
    else:
        A, B, C = u * r ** ((5 * p - 1) // 2), v * r ** ((5 * p - 1) // 6), r ** 5
    return verify_solution(A, B, C, d, p)


# ---------------------------------------------------------------------------
# Multi-Frey conductors
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConductorProfile:
    v2_options: FrozenSet[int]
    v3_options: FrozenSet[int]
    additive_primes: FrozenSet[int]
    notes: Dict[int, str] = field(default_factory=dict)
    nonminimal_at_2: bool = False

    def to_dict(self) -> dict:
        return {
            "v2_options": sorted(self.v2_options),
            "v3_options": sorted(self.v3_options),
            "additive_primes": sorted(self.additive_primes),
            "notes": {str(k): v for k, v in sorted(self.notes.items())},
            "nonminimal_at_2": self.nonminimal_at_2,
        }


def conductor_profile(d: int, a: Optional[int] = None, b: Optional[int] = None,
                      v2d: Optional[int] = None, v3d: Optional[int] = None,
                      p: Optional[int] = None) -> ConductorProfile:
    """
    Admissible exponents of 2 and 3 in the conductor of the multi-Frey curve
    for C = 2^a 3^b. Unknown a, b, p keep every branch open.

    Raises:
        UnhandledCase: d is not sixth-power-free
    """
    if d < 1:
        raise InvalidInput(f"d must be positive, got {d}")
    for ell in primefactors(d):
        if valuation(d, ell) >= 6:
            raise UnhandledCase(f"{ell}^6 divides d = {d}; the conductor table needs d sixth-power-free")
    v2d = valuation(d, 2) if v2d is None else v2d
    v3d = valuation(d, 3) if v3d is None else v3d
    notes: Dict[int, str] = {}

    # the prime 3
    if v3d == 0:
        v3 = {2}
        if b is None or b == 0 or (b == 1 and (p is None or p == 2)):
            v3.add(3)
        notes[3] = "minimal"
    elif v3d in (1, 2, 4, 5):
        v3 = {5}
        notes[3] = "minimal"
    elif v3d == 3:
        v3 = {2, 3}
        notes[3] = "minimal"
    else:
        raise UnhandledCase(f"v_3(d) = {v3d} is outside the conductor table")

    # the prime 2
    nonminimal = False
    if v2d == 0:
        v2 = {2, 3, 4, 5, 6}
        if a is None or p is None or a * p >= 6:
            v2 |= {0, 1}
            nonminimal = True
            notes[2] = "minimal, or non-minimal when a*p >= 6"
        else:
            notes[2] = "minimal"
    elif v2d == 1:
        v2 = {2, 3, 4, 7}
        notes[2] = "minimal"
    elif v2d == 2:
        v2 = {6}
        notes[2] = "minimal"
    elif v2d == 3:
        v2 = {0, 4, 5}
        nonminimal = True
        notes[2] = "minimal with v2 in {4, 5}, or non-minimal with 2 | B and good reduction"
    elif v2d == 4:
        v2 = {6}
        notes[2] = "minimal"
    elif v2d == 5:
        v2 = {2, 3, 4}
        nonminimal = True
        notes[2] = "non-minimal"
    else:
        raise UnhandledCase(f"v_2(d) = {v2d} is outside the conductor table")

    additive = frozenset(ell for ell in primefactors(d) if ell > 3)
    for ell in additive:
        notes[ell] = "additive"
    return ConductorProfile(frozenset(v2), frozenset(v3), additive, notes, nonminimal)


def admissible_conductors(d: int, a: Optional[int] = None, b: Optional[int] = None,
                          p: Optional[int] = None) -> List[int]:
    """Every conductor 2^alpha 3^beta prod(l^2) the multi-Frey curve can have"""
    profile = conductor_profile(d, a, b, p=p)
    odd_part = 1
    for ell in profile.additive_primes:
        odd_part *= ell * ell
    return sorted(2 ** alpha * 3 ** beta * odd_part
                  for alpha in profile.v2_options for beta in profile.v3_options)


@dataclass(frozen=True)
class MultiFreyHit:
    label: str
    conductor: int
    x: int
    y: int
    m: int
    exponents: Dict[int, int]
    primes: List[int]
    scaling: int = 1

    def to_dict(self) -> dict:
        return {
            "label": self.label, "conductor": self.conductor,
            "x": self.x, "y": self.y, "m": self.m,
            "exponents": {str(k): v for k, v in sorted(self.exponents.items())},
            "primes": self.primes, "scaling": self.scaling,
        }


def _recover(c4: int, c6: int, d: int) -> Optional[tuple]:
    # c4 = -2^4 3^2 d y^2, c6 = -2^6 3^3 d x
    if c4 >= 0 or c4 % (144 * d) or c6 % (1728 * d):
        return None
    y_sq = -c4 // (144 * d)
    y = isqrt(y_sq)
    if y == 0 or y * y != y_sq:
        return None
    x = -c6 // (1728 * d)
    return abs(x), y


def multifrey_search(d: int, curves) -> List[MultiFreyHit]:
    """
    Search a curve table for multi-Frey curves of solutions with C | 6^k.

    The table must declare coverage of every admissible conductor. An empty
    result means C cannot be supported on {2, 3}.

    Raises:
        IncompleteTable: the table does not cover an admissible conductor
    """
    _check_d(d)
    conductors = admissible_conductors(d)
    missing = [N for N in conductors if not curves.covers(N)]
    if missing:
        raise IncompleteTable(
            f"curve table '{curves.source}' does not cover conductors {missing}",
            hint="fetch the missing conductors or point --table at a larger excerpt",
        )

    profile = conductor_profile(d)
    scalings = (1, 2) if profile.nonminimal_at_2 else (1,)
    wanted = set(conductors)
    log_stage("Search", f"d={d}: {len(conductors)} admissible conductors, scalings {list(scalings)}")

    found: Dict[tuple, MultiFreyHit] = {}
    for row in sorted(curves.rows, key=lambda r: r.label):
        if row.conductor not in wanted:
            continue
        for u in scalings:
            recovered = _recover(row.c4 * u ** 4, row.c6 * u ** 6, d)
            if recovered is None:
                continue
            x, y = recovered
            m = x * x + d * y ** 6
            exponents = factor(m)
            if not exponents or set(exponents) - {2, 3}:
                log_debug("Search", f"{row.label}: m = {m} is not supported on {{2, 3}}")
                continue
            g = 0
            for e in exponents.values():
                g = gcd(g, e)
            primes = primefactors(g)
            if not primes:
                continue
            key = (x, y)
            if key not in found:
                found[key] = MultiFreyHit(row.label, row.conductor, x, y, m, exponents, primes, u)
                log_stage("Search", f"{row.label}: (x, y) = ({x}, {y}), m = {m}, p in {primes}")

    return sorted(found.values(), key=lambda h: h.label)


@dataclass(frozen=True)
class PrimeBound:
    d: int
    bound: Optional[int]
    path: str
    hits: List[MultiFreyHit]

    def to_dict(self) -> dict:
        published = "n/a"
        if self.d in PUBLISHED_BOUNDS:
            published = PUBLISHED_BOUNDS[self.d] or "-"
        return {
            "d": self.d,
            "bound": self.bound if self.bound is not None else "-",
            "path": self.path,
            "published": published,
            "hits": [h.to_dict() for h in self.hits],
        }


def inertness_applies(d: int) -> bool:
    """2 and 3 cannot divide C when d is not 7 mod 8 and not 2 mod 3"""
    return d % 8 != 7 and d % 3 != 2


def multiplicative_prime_bound(d: int, curves=None) -> PrimeBound:
    """
    Bound p for solutions with C supported on {2, 3}, recording which argument
    produced it. A bound of None means no such solution.
    """
    _check_d(d)
    if curves is not None:
        hits = multifrey_search(d, curves)
        bound = max((max(h.primes) for h in hits), default=None)
        return PrimeBound(d, bound, "table-search", hits)
    if inertness_applies(d):
        log_stage("Search", f"d={d}: 2 and 3 are inert or excluded, C cannot be supported on {{2, 3}}")
        return PrimeBound(d, None, "inertness", [])
    raise IncompleteTable(
        f"d={d} needs a curve table search (the inertness shortcut does not apply)",
        hint="pass --table FILE or --fetch",
    )
