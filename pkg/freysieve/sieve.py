"""
Mazur's trick

For each auxiliary prime ell, every local datum (A~, B~) of the Frey curve
modulo the primes above ell is compared with the newform's base-changed
eigenvalue. Primes p dividing none of the resulting constants B_ell(f) cannot
come from a solution.
"""
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Dict, List, Optional, Tuple

from freysieve.arith import (
    INERT, RAMIFIED, FiniteField, FqElem, NumberFieldElem, PrimeSplitting,
    factor, nf_norm, primes_above, residue_field, splitting_type, sqrt_minus_d,
)
from freysieve.ecurve import WeierstrassModel, count_points
from freysieve.errors import FactorizationIncomplete, HypothesisViolated, InvariantViolation, MissingEigenvalue
from freysieve.logs import log_debug, log_stage

ELIMINATED = "eliminated"
SURVIVES = "survives"
UNRESOLVED = "unresolved"
CM_FLAGGED = "cm"

HECKE_TOLERANCE = 1e-6


@dataclass(frozen=True)
class NewformData:
    """
    Hecke data of one Galois orbit of newforms in S_2(Gamma_0(N), eps).

    a_map and eps_map are keyed by rational primes; values live in
    Q[x]/(field_poly).
    """
    label: str
    level: int
    char_order: int
    field_poly: Tuple[int, ...]
    a_map: Dict[int, NumberFieldElem]
    eps_map: Dict[int, NumberFieldElem]
    cm: Optional[int] = None
    provenance: str = ""
    local_types: Dict[int, str] = field(default_factory=dict)

    def validate(self) -> "NewformData":
        """
        Raises:
            InvariantViolation: a character value is not a root of unity of the
                declared order, or an eigenvalue breaks the Hecke bound
        """
        if self.level < 1 or self.char_order < 1:
            raise InvariantViolation(f"{self.label}: level and character order must be positive")
        for ell, eps in self.eps_map.items():
            if eps ** self.char_order != 1:
                raise InvariantViolation(
                    f"{self.label}: eps({ell}) = {eps} is not a root of unity of order dividing {self.char_order}",
                )
        for ell, a in self.a_map.items():
            bound = 2 * ell ** 0.5
            for value in a.embeddings():
                if abs(value) > bound + HECKE_TOLERANCE:
                    raise InvariantViolation(
                        f"{self.label}: |a_{ell}| = {abs(value):.6f} exceeds the Hecke bound {bound:.6f}",
                    )
        return self


@dataclass(frozen=True)
class SieveConfig:
    d: int
    chi_order: int
    ell_list: Tuple[int, ...]
    p_min: int

    def check(self, level: int) -> None:
        """
        Raises:
            HypothesisViolated: some ell ramifies in K or divides 6*d*level
        """
        for ell in self.ell_list:
            if splitting_type(ell, self.d).kind == RAMIFIED:
                raise HypothesisViolated(f"ell = {ell} ramifies in Q(sqrt(-{self.d}))")
            if (6 * self.d * level) % ell == 0:
                raise HypothesisViolated(f"ell = {ell} divides 6*d*level = {6 * self.d * level}")


def base_change_coeff(f: NewformData, P: PrimeSplitting) -> NumberFieldElem:
    """
    a_l(f^BC): a_ell(f) when N(l) = ell, a_ell(f)^2 - 2*ell*eps(ell) when N(l) = ell^2.

    Raises:
        MissingEigenvalue: a_ell (or eps(ell) for inert ell) is absent
    """
    if P.kind == RAMIFIED:
        raise HypothesisViolated(f"base change rule needs ell = {P.ell} unramified")
    if P.ell not in f.a_map:
        raise MissingEigenvalue(f"{f.label}: no a_{P.ell}", hint="extend the newform file to cover every ell")
    a = f.a_map[P.ell]
    if P.kind == INERT:
        if P.ell not in f.eps_map:
            raise MissingEigenvalue(f"{f.label}: no eps({P.ell})")
        return a * a - 2 * P.ell * f.eps_map[P.ell]
    return a


def enumerate_local_solutions(d: int, P: PrimeSplitting) -> List[Tuple[FqElem, FqElem, FqElem]]:
    """All (A~, B~, C~) over F_{N(l)} with (A~, B~) != (0, 0) and C~ = A~^2 + d*B~^6"""
    _check_local(d, P)
    field_ = residue_field(P)
    triples = []
    for A in field_.elements():
        for B in field_.elements():
            if A.is_zero() and B.is_zero():
                continue
            triples.append((A, B, A * A + d * B ** 6))
    return triples


def _check_local(d: int, P: PrimeSplitting) -> None:
    if (6 * d) % P.ell == 0:
        raise HypothesisViolated(f"ell = {P.ell} divides 6d = {6 * d}")


def _orbit_representatives(d: int, P: PrimeSplitting) -> List[Tuple[FqElem, FqElem]]:
    # E_{lam^3 A, lam B} is isomorphic to E_{A, B}
    field_ = residue_field(P)
    one = field_(1)
    reps = [(A, one) for A in field_.elements()]
    q = field_.q
    g = gcd(3, q - 1)
    seen = set()
    for A in field_.nonzero():
        cls = A ** ((q - 1) // g)
        if cls not in seen:
            seen.add(cls)
            reps.append((A, field_(0)))
    return reps


def frey_reduction(d: int, A: FqElem, B: FqElem, u: FqElem) -> WeierstrassModel:
    """E_{A,B} over F_{N(l)} with sqrt(-d) mapped to u"""
    field_ = FiniteField(A.p, A.degree)
    return WeierstrassModel.over_fq([6 * B * u, 0, -4 * d * (A + B * B * B * u), 0, 0], field_)


@dataclass(frozen=True)
class LocalDatum:
    """Traces of one local datum at each prime above ell; None marks C~ = 0"""
    A: FqElem
    B: FqElem
    traces: Tuple[Optional[int], ...]

    @property
    def bad(self) -> bool:
        return self.traces[0] is None


@lru_cache(maxsize=None)
def local_data(d: int, ell: int) -> Tuple[LocalDatum, ...]:
    """Trace data of every orbit of local solutions at ell (independent of the form)"""
    P = splitting_type(ell, d)
    _check_local(d, P)
    ideals = primes_above(P)
    roots = [ideal.reduce(sqrt_minus_d(d)) for ideal in ideals]
    data = []
    for A, B in _orbit_representatives(d, P):
        C = A * A + d * B ** 6
        if C.is_zero():
            data.append(LocalDatum(A, B, tuple(None for _ in ideals)))
            continue
        traces = tuple(count_points(frey_reduction(d, A, B, u)) for u in roots)
        data.append(LocalDatum(A, B, traces))
    log_debug("Mazur", f"ell={ell}: {len(data)} local orbits, {sum(x.bad for x in data)} with C~ = 0")
    return tuple(data)


def _integral_norm(alpha: NumberFieldElem) -> int:
    # eigenvalues are algebraic integers; the numerator keeps the prime support otherwise
    value: Fraction = nf_norm(alpha)
    return abs(value.numerator)


@dataclass(frozen=True)
class SieveConstant:
    ell: int
    value: int
    zero_data: int
    total_data: int
    factors: Tuple[int, ...]

    def to_dict(self) -> dict:
        return {
            "ell": self.ell,
            "B": str(self.value),
            "zero_data": self.zero_data,
            "total_data": self.total_data,
            "factors": [str(x) for x in self.factors],
        }


def sieve_constant(f: NewformData, cfg: SieveConfig, ell: int) -> SieveConstant:
    """
    B_ell(f) = ell * prod of the distinct nonzero datum factors, or 0 when some
    datum passes for every p.

    A datum's factor is the gcd over the primes above ell of
      N(a_l(f^BC)^n - a_l(E)^n)         good reduction, n = chi_order
      N(eps(ell) a_ell(f)^2 - (ell+1)^2)  C~ = 0
    """
    if ell not in cfg.ell_list:
        raise HypothesisViolated(f"ell = {ell} is not in the configured list {list(cfg.ell_list)}")
    P = splitting_type(ell, cfg.d)
    bc = base_change_coeff(f, P)
    n = cfg.chi_order

    bad_factor: Optional[int] = None
    cache: Dict[int, int] = {}
    factors = set()
    zero_data = 0
    data = local_data(cfg.d, ell)
    for datum in data:
        if datum.bad:
            if bad_factor is None:
                if ell not in f.eps_map:
                    raise MissingEigenvalue(f"{f.label}: no eps({ell})")
                a = f.a_map[ell]
                bad_factor = _integral_norm(f.eps_map[ell] * a * a - (ell + 1) ** 2)
            combined = bad_factor
        else:
            combined = 0
            for trace in datum.traces:
                if trace not in cache:
                    cache[trace] = _integral_norm(bc ** n - trace ** n)
                combined = gcd(combined, cache[trace])
        if combined == 0:
            zero_data += 1
        else:
            factors.add(combined)

    if zero_data:
        value = 0
    else:
        value = ell
        for x in factors:
            value *= x
    log_debug("Mazur", f"{f.label} ell={ell}: B = {value} ({zero_data} zero data)")
    return SieveConstant(ell, value, zero_data, len(data), tuple(sorted(factors)))


def survivors_from_constants(constants: Dict[int, int]) -> Optional[List[int]]:
    """Primes dividing every nonzero constant; None when every constant is zero"""
    g = 0
    for value in constants.values():
        g = gcd(g, value)
    if g == 0:
        return None
    return sorted(factor(g)) if g > 1 else []


@dataclass(frozen=True)
class SieveOutcome:
    label: str
    verdict: str
    p_min: int
    surviving_primes: Optional[List[int]]
    constants: Tuple[SieveConstant, ...]
    cm: Optional[int] = None
    cofactor: Optional[int] = None

    @property
    def eliminated(self) -> bool:
        return self.verdict == ELIMINATED

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "verdict": self.verdict,
            "p_min": self.p_min,
            "surviving_primes": "all" if self.surviving_primes is None else self.surviving_primes,
            "constants": [c.to_dict() for c in self.constants],
            "cm": self.cm,
            "cofactor": None if self.cofactor is None else str(self.cofactor),
        }


def sieve_survivors(f: NewformData, cfg: SieveConfig) -> SieveOutcome:
    """
    Run Mazur's trick over cfg.ell_list.

    A form is eliminated when every surviving prime is at most cfg.p_min.
    CM forms are evaluated but never reported as eliminated. An incomplete
    factorization gives verdict "unresolved" with the primes found so far.
    """
    if not cfg.ell_list:
        raise HypothesisViolated("the list of auxiliary primes is empty")
    cfg.check(f.level)
    constants = tuple(sieve_constant(f, cfg, ell) for ell in cfg.ell_list)

    g = 0
    for c in constants:
        g = gcd(g, c.value)

    cofactor = None
    if g == 0:
        survivors: Optional[List[int]] = None
    elif g == 1:
        survivors = []
    else:
        try:
            survivors = sorted(factor(g))
        except FactorizationIncomplete as e:
            survivors = sorted(e.partial)
            cofactor = e.cofactor

    if f.cm is not None:
        verdict = CM_FLAGGED
    elif cofactor is not None:
        verdict = UNRESOLVED
    elif survivors is not None and all(p <= cfg.p_min for p in survivors):
        verdict = ELIMINATED
    else:
        verdict = SURVIVES

    shown = "all p" if survivors is None else (survivors or "none")
    log_stage("Mazur", f"{f.label}: {verdict}, surviving primes {shown}")
    return SieveOutcome(f.label, verdict, cfg.p_min, survivors, constants, f.cm, cofactor)
