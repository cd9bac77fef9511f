"""
Weierstrass models over Q, K = Q(sqrt(-d)) or a finite field

y^2 + a1*x*y + a3*y = x^3 + a2*x^2 + a4*x + a6
"""
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, List, Optional, Sequence, Tuple, Union

import sympy
from sympy import Poly, QQ, Symbol

from freysieve import config
from freysieve.arith import (
    FiniteField, FqElem, PrimeIdeal, QuadElem,
    is_rational_square, parse_quad, quad, quad_sqrt, quadratic_modulus,
)
from freysieve.errors import FieldTooLarge, SingularModel

RATIONAL = "rational"
QUADRATIC = "quadratic-field"
FINITE = "finite-field"

Point = Tuple[Any, Any]


@dataclass(frozen=True)
class WeierstrassModel:
    a1: Any
    a2: Any
    a3: Any
    a4: Any
    a6: Any
    domain: str = RATIONAL
    d: Optional[int] = None
    field: Optional[FiniteField] = None

    def __post_init__(self):
        for name in ("a1", "a2", "a3", "a4", "a6"):
            object.__setattr__(self, name, self._coerce(getattr(self, name)))

    def _coerce(self, c):
        if self.domain == RATIONAL:
            if isinstance(c, QuadElem):
                if not c.is_rational():
                    raise ValueError(f"{c} is not rational")
                return c.x
            return Fraction(c)
        if self.domain == QUADRATIC:
            if self.d is None:
                raise ValueError("a model over K needs d")
            if isinstance(c, QuadElem):
                return c
            if isinstance(c, str):
                return parse_quad(c, self.d)
            return quad(Fraction(c), self.d)
        if self.domain == FINITE:
            if self.field is None:
                raise ValueError("a model over a finite field needs its field")
            if isinstance(c, FqElem):
                return c
            return self.field(0) + c
        raise ValueError(f"unknown coefficient domain {self.domain!r}")

    # -- constructors -------------------------------------------------------
    @classmethod
    def over_q(cls, ainvs: Sequence) -> "WeierstrassModel":
        return cls(*ainvs, domain=RATIONAL)

    @classmethod
    def over_k(cls, ainvs: Sequence, d: int) -> "WeierstrassModel":
        return cls(*ainvs, domain=QUADRATIC, d=d)

    @classmethod
    def over_fq(cls, ainvs: Sequence, field: FiniteField) -> "WeierstrassModel":
        return cls(*ainvs, domain=FINITE, field=field)

    @property
    def ainvs(self) -> Tuple[Any, Any, Any, Any, Any]:
        return (self.a1, self.a2, self.a3, self.a4, self.a6)

    def zero(self):
        return self._coerce(0)

    def to_dict(self) -> dict:
        return {
            "domain": self.domain,
            "d": self.d,
            "ainvs": [str(c) for c in self.ainvs],
        }

    def __str__(self):
        lhs = "y^2"
        if self.a1:
            lhs += f" + ({self.a1})*x*y"
        if self.a3:
            lhs += f" + ({self.a3})*y"
        rhs = "x^3"
        for c, mono in ((self.a2, "x^2"), (self.a4, "x"), (self.a6, "")):
            if c:
                rhs += f" + ({c})" + (f"*{mono}" if mono else "")
        return f"{lhs} = {rhs}"


@dataclass(frozen=True)
class Invariants:
    b2: Any
    b4: Any
    b6: Any
    b8: Any
    c4: Any
    c6: Any
    disc: Any
    j: Optional[Any]

    def to_dict(self) -> dict:
        return {k: (None if v is None else str(v)) for k, v in self.__dict__.items()}


def invariants(E: WeierstrassModel) -> Invariants:
    """Standard b- and c-invariants, discriminant and j (None when singular)"""
    a1, a2, a3, a4, a6 = E.ainvs
    b2 = a1 * a1 + 4 * a2
    b4 = 2 * a4 + a1 * a3
    b6 = a3 * a3 + 4 * a6
    b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
    c4 = b2 * b2 - 24 * b4
    c6 = -b2 * b2 * b2 + 36 * b2 * b4 - 216 * b6
    disc = -b2 * b2 * b8 - 8 * b4 * b4 * b4 - 27 * b6 * b6 + 9 * b2 * b4 * b6
    j = None if disc == 0 else c4 * c4 * c4 / disc
    return Invariants(b2, b4, b6, b8, c4, c6, disc, j)


def is_singular(E: WeierstrassModel) -> bool:
    return invariants(E).disc == 0


def reduce_model(E: WeierstrassModel, ideal: PrimeIdeal) -> WeierstrassModel:
    """Reduce a model over Q or K at a prime ideal of K"""
    field = FiniteField(ideal.ell, ideal.splitting.residue_degree)
    if E.domain == QUADRATIC:
        coeffs = [ideal.reduce(c) for c in E.ainvs]
    elif E.domain == RATIONAL:
        coeffs = [field(0) + c for c in E.ainvs]
    else:
        raise ValueError("model is already over a finite field")
    return WeierstrassModel.over_fq(coeffs, field)


# ---------------------------------------------------------------------------
# Point counting
# ---------------------------------------------------------------------------

def count_points(E: WeierstrassModel) -> int:
    """
    Trace of Frobenius a_q = q + 1 - #E(F_q) by enumeration of x.

    Raises:
        SingularModel: the reduction is singular
        FieldTooLarge: q exceeds FREYSIEVE_MAX_FIELD_SIZE
    """
    if E.domain != FINITE:
        raise ValueError("count_points needs a model over a finite field")
    field = E.field
    q = field.q
    if q > config.settings.max_field_size:
        raise FieldTooLarge(
            f"F_{q} is larger than the configured limit {config.settings.max_field_size}",
            hint="raise FREYSIEVE_MAX_FIELD_SIZE",
        )
    if is_singular(E):
        raise SingularModel(f"model is singular over F_{q}: {E}")

    if field.p == 2:
        affine = _count_affine_char2(E)
    elif field.degree == 1:
        affine = _count_affine_prime(field.p, [c.a for c in E.ainvs])
    else:
        affine = _count_affine_quadratic(field.p, [c.coords for c in E.ainvs])
    return q + 1 - (affine + 1)


def _count_affine_prime(p: int, coeffs: List[int]) -> int:
    a1, a2, a3, a4, a6 = coeffs
    roots = [0] * p
    for y in range(p):
        roots[y * y % p] += 1
    total = 0
    for x in range(p):
        h = (a1 * x + a3) % p
        f = (((x + a2) * x + a4) * x + a6) % p
        total += roots[(h * h + 4 * f) % p]
    return total


def _count_affine_quadratic(p: int, coeffs: List[Tuple[int, int]]) -> int:
    c0, _ = quadratic_modulus(p)

    def mul(u, v):
        return ((u[0] * v[0] + c0 * u[1] * v[1]) % p, (u[0] * v[1] + u[1] * v[0]) % p)

    def add(u, v):
        return ((u[0] + v[0]) % p, (u[1] + v[1]) % p)

    q = p * p
    roots = [0] * q
    elements = [(a, b) for b in range(p) for a in range(p)]
    for y in elements:
        s = mul(y, y)
        roots[s[0] + s[1] * p] += 1

    a1, a2, a3, a4, a6 = coeffs
    four = (4 % p, 0)
    total = 0
    for x in elements:
        h = add(mul(a1, x), a3)
        f = add(mul(add(mul(add(x, a2), x), a4), x), a6)
        disc = add(mul(h, h), mul(four, f))
        total += roots[disc[0] + disc[1] * p]
    return total


def _count_affine_char2(E: WeierstrassModel) -> int:
    # q <= 4 here, brute force over both coordinates
    a1, a2, a3, a4, a6 = E.ainvs
    elements = list(E.field.elements())
    total = 0
    for x in elements:
        rhs = ((x + a2) * x + a4) * x + a6
        for y in elements:
            if y * y + a1 * x * y + a3 * y == rhs:
                total += 1
    return total


# ---------------------------------------------------------------------------
# Twists
# ---------------------------------------------------------------------------

def quadratic_twist(E: WeierstrassModel, delta) -> WeierstrassModel:
    """Twist by delta: y^2 = x^3 + delta*b2/4 x^2 + delta^2*b4/2 x + delta^3*b6/4"""
    if delta == 0:
        raise ValueError("twist parameter must be nonzero")
    if E.domain == FINITE and E.field.p == 2:
        raise ValueError("quadratic twists in characteristic 2 are not supported")
    inv = invariants(E)
    delta = E._coerce(delta)
    half = E._coerce(1) / 2
    quarter = half * half
    return WeierstrassModel(
        E.zero(),
        delta * inv.b2 * quarter,
        E.zero(),
        delta * delta * inv.b4 * half,
        delta * delta * delta * inv.b6 * quarter,
        domain=E.domain, d=E.d, field=E.field,
    )


# ---------------------------------------------------------------------------
# 3-torsion
# ---------------------------------------------------------------------------

_X = Symbol("x")


def negate(E: WeierstrassModel, P: Point) -> Point:
    x, y = P
    return (x, -y - E.a1 * x - E.a3)


def double(E: WeierstrassModel, P: Point) -> Optional[Point]:
    """2P, or None when P has order 2"""
    x, y = P
    a1, a2, a3, a4, a6 = E.ainvs
    denom = 2 * y + a1 * x + a3
    if denom == 0:
        return None
    lam = (3 * x * x + 2 * a2 * x + a4 - a1 * y) / denom
    nu = y - lam * x
    x2 = lam * lam + a1 * lam - a2 - 2 * x
    y2 = -(lam + a1) * x2 - nu - a3
    return (x2, y2)


def on_curve(E: WeierstrassModel, P: Point) -> bool:
    x, y = P
    a1, a2, a3, a4, a6 = E.ainvs
    return y * y + a1 * x * y + a3 * y - (x * x * x + a2 * x * x + a4 * x + a6) == 0


def is_order_three(E: WeierstrassModel, P: Point) -> bool:
    return on_curve(E, P) and double(E, P) == negate(E, P)


def psi3_coefficients(E: WeierstrassModel) -> List[Any]:
    """3-division polynomial 3x^4 + b2 x^3 + 3b4 x^2 + 3b6 x + b8, descending"""
    inv = invariants(E)
    return [E._coerce(3), inv.b2, 3 * inv.b4, 3 * inv.b6, inv.b8]


def _lift_to_k(E: WeierstrassModel, d: Optional[int]) -> Tuple[List[QuadElem], int]:
    if E.domain == QUADRATIC:
        return [c for c in E.ainvs], E.d
    if E.domain == RATIONAL:
        k = d if d is not None else 1
        return [quad(c, k) for c in E.ainvs], k
    raise ValueError("3-torsion search runs over Q or K only")


def _frac(c) -> sympy.Rational:
    return sympy.Rational(c.numerator, c.denominator)


def _from_sympy(c) -> Fraction:
    c = sympy.Rational(c)
    return Fraction(int(c.p), int(c.q))


def three_division_roots(E: WeierstrassModel, search_field: Optional[int] = None) -> List[Any]:
    """
    Roots of psi_3 in the search field (K for models over K; Q unless
    search_field = d is given for models over Q).
    """
    over_q = E.domain == RATIONAL and search_field is None
    ainvs, d = _lift_to_k(E, search_field)
    model = WeierstrassModel.over_k(ainvs, d)
    psi = psi3_coefficients(model)

    # psi = P + s*Q with P, Q over Q; N(psi) = P^2 + d*Q^2 has every K-root of psi
    P = Poly([_frac(c.x) for c in psi], _X, domain=QQ)
    Q = Poly([_frac(c.y) for c in psi], _X, domain=QQ)
    norm_poly = P * P + Q * Q * d

    candidates: List[QuadElem] = []
    _, factors = norm_poly.factor_list()
    for fac, _ in factors:
        coeffs = [_from_sympy(c) for c in fac.all_coeffs()]
        if fac.degree() == 1:
            candidates.append(quad(-coeffs[1] / coeffs[0], d))
        elif fac.degree() == 2 and not over_q:
            a, b, c = coeffs
            root = quad_sqrt(quad(b * b - 4 * a * c, d))
            if root is not None:
                candidates.append((-b + root) / (2 * a))
                candidates.append((-b - root) / (2 * a))

    roots = []
    for x0 in candidates:
        value = quad(0, d)
        for c in psi:
            value = value * x0 + c
        if value == 0 and x0 not in roots:
            roots.append(x0)
    return roots


def has_3_torsion(E: WeierstrassModel, search_field: Optional[int] = None) -> Optional[Point]:
    """
    A point of exact order 3 with coordinates in the search field, or None.

    The returned point is certified: P != O and 2P = -P.

    Raises:
        SingularModel: the model has zero discriminant
    """
    if is_singular(E):
        raise SingularModel(f"3-torsion search on a singular model: {E}")
    over_q = E.domain == RATIONAL and search_field is None
    ainvs, d = _lift_to_k(E, search_field)
    model = WeierstrassModel.over_k(ainvs, d)
    a1, a2, a3, a4, a6 = model.ainvs

    for x0 in three_division_roots(E, search_field):
        h = a1 * x0 + a3
        f = ((x0 + a2) * x0 + a4) * x0 + a6
        disc = h * h + 4 * f
        if over_q:
            root = is_rational_square(disc.x)
            root = None if root is None else quad(root, d)
        else:
            root = quad_sqrt(disc)
        if root is None:
            continue
        for y0 in ((-h + root) / 2, (-h - root) / 2):
            if is_order_three(model, (x0, y0)):
                if E.domain == RATIONAL and over_q:
                    return (x0.x, y0.x)
                return (x0, y0)
    return None
