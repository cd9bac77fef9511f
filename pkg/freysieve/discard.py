"""
Filters applied after Mazur's trick

- symplectic conditions (multiplicative and ramified) and their combination
  into residue classes of p that cannot occur
- the 3-torsion congruence test
- local-type compatibility of labels
"""
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, FrozenSet, Iterable, Optional, Sequence, Union

from sympy import divisors, isprime, primefactors, totient

from freysieve import config
from freysieve.arith import kronecker, prime_ideals_up_to, squarefree_kernel
from freysieve.ecurve import (
    QUADRATIC, WeierstrassModel, count_points, has_3_torsion, reduce_model, three_division_roots,
)
from freysieve.errors import HypothesisViolated, InvalidInput, NonIntegralReduction, SingularModel
from freysieve.logs import log_debug, log_stage

INCONCLUSIVE = "inconclusive"
WITNESS = "witness"


# ---------------------------------------------------------------------------
# Valuations that depend on p
# ---------------------------------------------------------------------------

_AFFINE = re.compile(r"^\s*(?:([+-]?\d*)\s*\*?\s*p)?\s*([+-]\s*\d+|\d+)?\s*$")


@dataclass(frozen=True)
class AffineValuation:
    """alpha*p + beta; modulo p only beta matters"""
    alpha: int
    beta: int

    @classmethod
    def of(cls, value: Union[int, str, "AffineValuation"]) -> "AffineValuation":
        if isinstance(value, AffineValuation):
            return value
        if isinstance(value, int):
            return cls(0, value)
        return cls.parse(value)

    @classmethod
    def parse(cls, text: str) -> "AffineValuation":
        """Read "8", "3p-9", "-4", "2*p+1" """
        compact = text.replace(" ", "")
        m = _AFFINE.match(compact)
        if not compact or not m or (m.group(1) is None and m.group(2) is None):
            raise InvalidInput(f"cannot read valuation {text!r}", hint="use the form a*p+b, e.g. 3p-9")
        coeff = m.group(1)
        if coeff is None:
            alpha = 0
        elif coeff in ("", "+"):
            alpha = 1
        elif coeff == "-":
            alpha = -1
        else:
            alpha = int(coeff)
        beta = int(m.group(2)) if m.group(2) else 0
        return cls(alpha, beta)

    def mod_p(self) -> int:
        return self.beta

    def __str__(self):
        if not self.alpha:
            return str(self.beta)
        head = "p" if self.alpha == 1 else "-p" if self.alpha == -1 else f"{self.alpha}p"
        if self.beta:
            return f"{head}{self.beta:+d}"
        return head


# ---------------------------------------------------------------------------
# Symplectic conditions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SymplecticCondition:
    """
    (m/p) = t when tied (t is the unknown symplectic type of one candidate
    curve), (m/p) = sign when fixed. m is a square-free kernel; tied with m = 1
    forces t = +1.
    """
    m: int
    sign: Optional[int] = None
    source: str = ""

    def __post_init__(self):
        object.__setattr__(self, "m", squarefree_kernel(self.m))
        if self.sign not in (None, 1, -1):
            raise InvalidInput(f"sign must be +1, -1 or tied, got {self.sign}")

    @property
    def tied(self) -> bool:
        return self.sign is None

    @property
    def forced(self) -> bool:
        return self.tied and self.m == 1

    def to_dict(self) -> dict:
        if self.forced:
            kind = "forced-symplectic"
        else:
            kind = "tied" if self.tied else "fixed"
        return {"m": self.m, "sign": self.sign, "kind": kind, "source": self.source}

    def __str__(self):
        rhs = "t" if self.tied else f"{self.sign:+d}"
        return f"({self.m}/p) = {rhs}" + (f" at {self.source}" if self.source else "")


def symplectic_multiplicative(vE, vE2, ell: int, source: str = "") -> SymplecticCondition:
    """
    Both curves multiplicative at a prime above ell: E[p] and E'[p] are
    symplectically isomorphic iff (vE*vE2 / p) = 1.

    Raises:
        HypothesisViolated: a valuation is divisible by p for every p
    """
    v1 = AffineValuation.of(vE).mod_p()
    v2 = AffineValuation.of(vE2).mod_p()
    if v1 == 0 or v2 == 0:
        raise HypothesisViolated(
            f"valuations {vE}, {vE2} at {source or ell}: p divides the discriminant valuation",
        )
    return SymplecticCondition(v1 * v2, None, source or f"ell={ell}")


@dataclass(frozen=True)
class RamifiedCertificate:
    """Defect and a 3-torsion point, both required by the ramified test"""
    defect: int
    three_torsion_point: Any
    kodaira: Optional[str] = None


def defect_from_kodaira(symbol: str) -> Optional[int]:
    """Advisory lookup: reduction types IV and IV* have defect 3"""
    return 3 if symbol.strip().upper() in ("IV", "IV*") else None


def symplectic_ramified(ell: int, vE_mod3, vE2_mod3, certificate: Optional[RamifiedCertificate],
                        source: str = "") -> SymplecticCondition:
    """
    Potentially good reduction of defect 3 at a prime above ell = 2 (mod 3):
    r = 0 when the valuations agree mod 3 (forced symplectic), else (ell/p) = t.

    Raises:
        HypothesisViolated: ell != 2 (mod 3), or the certificate is missing
    """
    if ell % 3 != 2:
        raise HypothesisViolated(f"ramified symplectic test needs ell = 2 (mod 3), got {ell}")
    if certificate is None or certificate.defect != 3 or certificate.three_torsion_point is None:
        raise HypothesisViolated(
            f"ramified symplectic test at {source or ell} needs a defect-3 certificate with a 3-torsion point",
            hint="attach the 3-torsion point found by has_3_torsion and the reduction type",
        )
    v1 = AffineValuation.of(vE_mod3)
    v2 = AffineValuation.of(vE2_mod3)
    if (v1.alpha - v2.alpha) % 3:
        raise HypothesisViolated(f"valuations {v1} and {v2} differ mod 3 depending on p")
    r = 0 if (v1.beta - v2.beta) % 3 == 0 else 1
    return SymplecticCondition(1 if r == 0 else ell, None, source or f"ell={ell}")


# ---------------------------------------------------------------------------
# Residue classes of p
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExclusionResult:
    modulus: int
    excluded_classes: FrozenSet[int]
    density: Fraction

    def reduced(self) -> "ExclusionResult":
        """Same exclusion on the smallest modulus where it is well defined"""
        units = [c for c in range(self.modulus) if math.gcd(c, self.modulus) == 1]
        for m in divisors(self.modulus):
            verdict = {}
            ok = True
            for c in units:
                key = c % m
                inside = c in self.excluded_classes
                if verdict.setdefault(key, inside) != inside:
                    ok = False
                    break
            if ok:
                classes = frozenset(k for k, inside in verdict.items() if inside)
                return ExclusionResult(m, classes, self.density)
        return self

    def excludes(self, p: int) -> bool:
        return p % self.modulus in self.excluded_classes

    def statement(self) -> str:
        if not self.excluded_classes:
            return "no congruence class excluded"
        classes = ",".join(str(c) for c in sorted(self.excluded_classes))
        return f"p ≡ {classes} (mod {self.modulus})"

    def to_dict(self) -> dict:
        return {
            "modulus": self.modulus,
            "excluded_classes": sorted(self.excluded_classes),
            "density": str(self.density),
        }


def _class_modulus(conditions: Iterable[SymplecticCondition]) -> int:
    odd = set()
    for c in conditions:
        odd.update(q for q in primefactors(abs(c.m)) if q != 2)
    modulus = 8
    for q in sorted(odd):
        modulus *= q
    return modulus


def _class_prime(c: int, modulus: int) -> int:
    p = c
    while not isprime(p):
        p += modulus
    return p


def _consistent(conditions: Sequence[SymplecticCondition], p: int) -> bool:
    for t in (1, -1):
        if all(kronecker(c.m, p) == (t if c.tied else c.sign) for c in conditions):
            return True
    return False


def combine_alternatives(groups: Sequence[Sequence[SymplecticCondition]]) -> ExclusionResult:
    """
    Classes of p excluded for every candidate curve. Each group holds the
    conditions of one candidate and carries its own unknown type.
    """
    groups = [list(g) for g in groups if g]
    if not groups:
        raise InvalidInput("at least one symplectic condition is needed")
    modulus = _class_modulus(c for g in groups for c in g)
    excluded = set()
    for c in range(1, modulus):
        if math.gcd(c, modulus) != 1:
            continue
        p = _class_prime(c, modulus)
        if all(not _consistent(g, p) for g in groups):
            excluded.add(c)
    density = Fraction(len(excluded), int(totient(modulus)))
    result = ExclusionResult(modulus, frozenset(excluded), density)
    log_debug("Symplectic", f"{sum(len(g) for g in groups)} conditions: {result.reduced().statement()}")
    return result


def combine_conditions(conditions: Sequence[SymplecticCondition]) -> ExclusionResult:
    """Classes of p for which no symplectic type satisfies every condition"""
    return combine_alternatives([conditions])


def intersect_exclusions(results: Sequence[ExclusionResult]) -> ExclusionResult:
    """Classes excluded by every result, on the lcm of their moduli"""
    if not results:
        raise InvalidInput("nothing to intersect")
    modulus = 1
    for r in results:
        modulus = modulus * r.modulus // math.gcd(modulus, r.modulus)
    excluded = frozenset(
        c for c in range(1, modulus)
        if math.gcd(c, modulus) == 1 and all(r.excludes(c) for r in results)
    )
    density = Fraction(len(excluded), int(totient(modulus)))
    return ExclusionResult(modulus, excluded, density).reduced()


# ---------------------------------------------------------------------------
# 3-torsion test
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Torsion3Result:
    status: str
    reason: str = ""
    ideal: Optional[str] = None
    norm: Optional[int] = None
    trace: Optional[int] = None
    bound: Optional[float] = None
    scanned: int = 0

    @property
    def conclusive(self) -> bool:
        return self.status == WITNESS

    @property
    def exhausted(self) -> bool:
        """No witness below the scan limit; a larger limit may still find one"""
        return self.status == INCONCLUSIVE and self.reason != "3-torsion-point"

    def to_dict(self) -> dict:
        return {
            "status": self.status, "reason": self.reason, "ideal": self.ideal,
            "norm": self.norm, "trace": self.trace,
            "bound": None if self.bound is None else round(self.bound, 6),
            "scanned": self.scanned,
        }


def torsion3_test(E2: WeierstrassModel, scan_limit: Optional[int] = None,
                  isogenous: Sequence[WeierstrassModel] = ()) -> Torsion3Result:
    """
    First prime q of good reduction (residue characteristic != 3) with
    a_q(E2) != 1 + N(q) (mod 3). Then E2 cannot be congruent to the Frey
    curve for p > 4*sqrt(N(q)).
    """
    if E2.domain != QUADRATIC:
        raise InvalidInput("the 3-torsion test runs on a model over K")
    limit = scan_limit or config.settings.torsion3_scan_limit

    for model in (E2, *isogenous):
        point = has_3_torsion(model)
        if point is not None:
            log_stage("Torsion3", f"3-torsion point ({point[0]}, {point[1]}); test is inconclusive")
            return Torsion3Result(INCONCLUSIVE, reason="3-torsion-point")

    scanned = 0
    for ideal in prime_ideals_up_to(E2.d, limit):
        if ideal.ell == 3:
            continue
        try:
            reduced = reduce_model(E2, ideal)
            a = count_points(reduced)
        except (NonIntegralReduction, SingularModel):
            log_debug("Torsion3", f"skip {ideal.label}: bad reduction")
            continue
        scanned += 1
        if (a - 1 - ideal.norm) % 3:
            bound = 4 * math.sqrt(ideal.norm)
            log_stage("Torsion3", f"witness {ideal.label} (norm {ideal.norm}): a = {a}, bound {bound:.2f}")
            return Torsion3Result(WITNESS, "", ideal.label, ideal.norm, a, bound, scanned)

    reason = "kernel-without-point" if three_division_roots(E2) else "scan-exhausted"
    log_stage("Torsion3", f"no witness up to norm {limit} ({reason})")
    return Torsion3Result(INCONCLUSIVE, reason=reason, scanned=scanned)


# ---------------------------------------------------------------------------
# Local types
# ---------------------------------------------------------------------------

_LOCAL_TYPE = re.compile(r"^(principal-series|supercuspidal)\((\d+)\)$|^(steinberg)$")
_ORDERS = (1, 2, 3, 4, 6)


def parse_local_type(label: str):
    m = _LOCAL_TYPE.match(label.strip().lower())
    if not m:
        raise InvalidInput(f"unknown local type {label!r}",
                           hint="use principal-series(n), steinberg or supercuspidal(n)")
    if m.group(3):
        return ("steinberg", None)
    n = int(m.group(2))
    if n not in _ORDERS:
        raise InvalidInput(f"character order {n} in {label!r} is not one of {_ORDERS}")
    return (m.group(1), n)


def local_type_compatible(type_f: str, type_g: str, p: int) -> bool:
    """Local types survive congruences mod p for p > 3; no claim for p <= 3"""
    left, right = parse_local_type(type_f), parse_local_type(type_g)
    if p <= 3:
        return True
    return left == right
