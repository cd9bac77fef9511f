"""
Exact arithmetic foundation

- K = Q(sqrt(-d)) with exact rational coordinates (QuadElem)
- splitting of rational primes in K and reduction into F_l / F_{l^2}
- number-field elements for Hecke eigenvalues, with norms via resultants
- Kronecker symbols and factoring (sympy)
"""
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

import sympy
from sympy import Poly, QQ, Symbol, factorint, isprime, jacobi_symbol, primerange
from sympy.ntheory import pollard_rho, sqrt_mod
from sympy.ntheory.factor_ import core

from freysieve import config
from freysieve.errors import FactorizationIncomplete, NonIntegralReduction

Rational = Union[int, Fraction]

SPLIT = "split"
INERT = "inert"
RAMIFIED = "ramified"

# Trial division bound before the randomized stage
TRIAL_LIMIT = 10 ** 5


# ---------------------------------------------------------------------------
# Integers
# ---------------------------------------------------------------------------

def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a/n), n != 0"""
    if n == 0:
        raise ValueError("Kronecker symbol (a/n) needs n != 0")
    result = 1
    if n < 0:
        n = -n
        if a < 0:
            result = -result

    twos = 0
    while n % 2 == 0:
        n //= 2
        twos += 1
    if twos:
        if a % 2 == 0:
            return 0
        if twos % 2 == 1 and a % 8 in (3, 5):
            result = -result

    if n == 1:
        return result
    return result * jacobi_symbol(a % n, n)


def is_squarefree(n: int) -> bool:
    return n != 0 and all(e == 1 for e in factorint(abs(n)).values())


def squarefree_kernel(m: int) -> int:
    """Square-free representative of the square class of m (sign kept)"""
    if m == 0:
        raise ValueError("0 has no square class")
    sign = -1 if m < 0 else 1
    return sign * int(core(abs(m), 2))


def valuation(n: int, p: int) -> int:
    if n == 0:
        raise ValueError("valuation of 0 is infinite")
    v = 0
    n = abs(n)
    while n % p == 0:
        n //= p
        v += 1
    return v


def field_discriminant(d: int) -> int:
    """Discriminant of Q(sqrt(-d)) for square-free d >= 1"""
    return -d if d % 4 == 3 else -4 * d


def factor(n: int, seed: Optional[int] = None) -> Dict[int, int]:
    """
    Complete factorization of |n| as {prime: exponent}.

    Trial division first; composite cofactors up to FREYSIEVE_FACTOR_MAX_BITS
    are finished by sympy, larger ones get a bounded Pollard rho attempt.

    Raises:
        FactorizationIncomplete: a composite cofactor resisted the configured effort
    """
    if n == 0:
        raise ValueError("cannot factor 0")
    settings = config.settings
    if seed is None:
        seed = settings.seed

    result: Dict[int, int] = {}
    pending: List[Tuple[int, int]] = []
    for prime, exp in factorint(abs(n), limit=TRIAL_LIMIT).items():
        if prime == 1:
            continue
        if isprime(prime):
            result[prime] = result.get(prime, 0) + exp
        else:
            pending.append((prime, exp))

    while pending:
        composite, exp = pending.pop()
        if composite.bit_length() <= settings.factor_max_bits:
            for prime, e in factorint(composite).items():
                result[prime] = result.get(prime, 0) + e * exp
            continue
        divisor = pollard_rho(composite, seed=seed, max_steps=settings.factor_rho_steps)
        if not divisor:
            raise FactorizationIncomplete(n, result, composite)
        for part in (divisor, composite // divisor):
            if isprime(part):
                result[part] = result.get(part, 0) + exp
            else:
                pending.append((part, exp))

    return dict(sorted(result.items()))


# ---------------------------------------------------------------------------
# The quadratic field K = Q(sqrt(-d))
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _checked_d(d: int) -> int:
    if d < 1 or not is_squarefree(d):
        raise ValueError(f"d must be a positive square-free integer, got {d}")
    return d


def _as_fraction(value: Rational) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    raise TypeError(f"expected an int or Fraction, got {type(value).__name__}")


@dataclass(frozen=True, eq=False)
class QuadElem:
    """x + y*sqrt(-d) with rational x, y"""
    x: Fraction
    y: Fraction
    d: int

    def __post_init__(self):
        object.__setattr__(self, "x", _as_fraction(self.x))
        object.__setattr__(self, "y", _as_fraction(self.y))
        _checked_d(self.d)

    # -- coercion -----------------------------------------------------------
    def _coerce(self, other) -> Optional["QuadElem"]:
        if isinstance(other, QuadElem):
            if other.d != self.d:
                raise ValueError(f"mixing Q(sqrt(-{self.d})) and Q(sqrt(-{other.d}))")
            return other
        if isinstance(other, (int, Fraction)):
            return QuadElem(Fraction(other), Fraction(0), self.d)
        return None

    # -- ring operations ----------------------------------------------------
    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return QuadElem(self.x + o.x, self.y + o.y, self.d)

    __radd__ = __add__

    def __neg__(self):
        return QuadElem(-self.x, -self.y, self.d)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return QuadElem(self.x - o.x, self.y - o.y, self.d)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return QuadElem(self.x * o.x - self.d * self.y * o.y,
                        self.x * o.y + self.y * o.x, self.d)

    __rmul__ = __mul__

    def inverse(self) -> "QuadElem":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("inverse of 0 in K")
        return QuadElem(self.x / n, -self.y / n, self.d)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        result = QuadElem(Fraction(1), Fraction(0), self.d)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    # -- structure ----------------------------------------------------------
    def conj(self) -> "QuadElem":
        return QuadElem(self.x, -self.y, self.d)

    def norm(self) -> Fraction:
        return self.x * self.x + self.d * self.y * self.y

    def trace(self) -> Fraction:
        return 2 * self.x

    def is_zero(self) -> bool:
        return self.x == 0 and self.y == 0

    def is_rational(self) -> bool:
        return self.y == 0

    def is_integral(self) -> bool:
        """Integrality in the maximal order: trace and norm are integers"""
        return self.trace().denominator == 1 and self.norm().denominator == 1

    def __bool__(self):
        return not self.is_zero()

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.y == 0 and self.x == other
        if isinstance(other, QuadElem):
            return (self.x, self.y, self.d) == (other.x, other.y, other.d)
        return NotImplemented

    def __hash__(self):
        if self.y == 0:
            return hash(self.x)
        return hash((self.x, self.y, self.d))

    def __str__(self):
        if self.y == 0:
            return str(self.x)
        y_part = "s" if self.y == 1 else "-s" if self.y == -1 else f"{self.y}*s"
        if self.x == 0:
            return y_part
        sign = "" if y_part.startswith("-") else "+"
        return f"{self.x}{sign}{y_part}"

    def __repr__(self):
        return f"QuadElem({self}, d={self.d})"


def sqrt_minus_d(d: int) -> QuadElem:
    return QuadElem(Fraction(0), Fraction(1), d)


def quad(value: Rational, d: int) -> QuadElem:
    """Embed a rational number into K"""
    return QuadElem(_as_fraction(value), Fraction(0), d)


_S = Symbol("s")


def parse_quad(text: Union[str, int], d: int) -> QuadElem:
    """
    Parse an expression in s = sqrt(-d), e.g. "(1907*s - 1615)/2".

    Raises:
        ValueError: the text is not a polynomial expression in s
    """
    source = str(text).replace("^", "**")
    try:
        expr = sympy.sympify(source, locals={"s": _S})
        poly = Poly(sympy.expand(expr), _S, domain=QQ)
    except (sympy.SympifyError, sympy.PolynomialError, TypeError, SyntaxError) as e:
        raise ValueError(f"cannot read {text!r} as an element of Q(sqrt(-{d})): {e}")

    result = quad(0, d)
    root = sqrt_minus_d(d)
    for (k,), coeff in poly.terms():
        result = result + Fraction(int(coeff.p), int(coeff.q)) * root ** k
    return result


def is_rational_square(r: Fraction) -> Optional[Fraction]:
    """Exact square root of a non-negative rational, or None"""
    if r < 0:
        return None
    num, num_exact = sympy.integer_nthroot(r.numerator, 2)
    den, den_exact = sympy.integer_nthroot(r.denominator, 2)
    if num_exact and den_exact:
        return Fraction(int(num), int(den))
    return None


def quad_sqrt(z: QuadElem) -> Optional[QuadElem]:
    """A square root of z inside K, or None when z is not a square in K"""
    if z.is_zero():
        return z
    n = is_rational_square(z.norm())
    if n is None:
        return None
    # (u + v s)^2 = z  =>  u^2 - d v^2 = x, 2uv = y, u^2 + d v^2 = n
    u = is_rational_square((z.x + n) / 2)
    if u is not None and u != 0:
        candidate = QuadElem(u, z.y / (2 * u), z.d)
        if candidate * candidate == z:
            return candidate
    v = is_rational_square((n - z.x) / (2 * z.d))
    if v is not None and v != 0:
        u_val = z.y / (2 * z.d * v) if z.y else Fraction(0)
        # u^2 must equal (x + n)/2 as well
        candidate = QuadElem(u_val, v, z.d)
        if candidate * candidate == z:
            return candidate
    return None


# ---------------------------------------------------------------------------
# Finite fields F_l and F_{l^2}
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def quadratic_modulus(p: int) -> Tuple[int, int]:
    """(c0, c1) with t^2 = c0 + c1*t defining F_{p^2}"""
    if p == 2:
        return (1, 1)
    s = 2
    while jacobi_symbol(s, p) != -1:
        s += 1
    return (s, 0)


@dataclass(frozen=True)
class FqElem:
    """a + b*t in F_p (degree 1) or F_{p^2} (degree 2)"""
    p: int
    degree: int
    a: int
    b: int = 0

    def __post_init__(self):
        object.__setattr__(self, "a", self.a % self.p)
        object.__setattr__(self, "b", self.b % self.p if self.degree == 2 else 0)

    @property
    def q(self) -> int:
        return self.p ** self.degree

    @property
    def coords(self) -> Tuple[int, int]:
        return (self.a, self.b)

    @property
    def key(self) -> int:
        return self.a + self.b * self.p

    def _coerce(self, other) -> Optional["FqElem"]:
        if isinstance(other, FqElem):
            if (other.p, other.degree) != (self.p, self.degree):
                if other.p == self.p and other.degree == 1:
                    return FqElem(self.p, self.degree, other.a)
                if other.p == self.p and self.degree == 1 and other.degree == 2:
                    raise ValueError("cannot coerce an F_{p^2} element into F_p")
                raise ValueError("elements of different finite fields")
            return other
        if isinstance(other, int):
            return FqElem(self.p, self.degree, other)
        if isinstance(other, Fraction):
            if other.denominator % self.p == 0:
                raise NonIntegralReduction(f"{other} is not integral at {self.p}")
            return FqElem(self.p, self.degree, other.numerator * pow(other.denominator, -1, self.p))
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if o.degree > self.degree:
            return o + self
        return FqElem(self.p, self.degree, self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __neg__(self):
        return FqElem(self.p, self.degree, -self.a, -self.b)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if o.degree > self.degree:
            return o * self
        if self.degree == 1:
            return FqElem(self.p, 1, self.a * o.a)
        c0, c1 = quadratic_modulus(self.p)
        bb = self.b * o.b
        return FqElem(self.p, 2,
                      self.a * o.a + bb * c0,
                      self.a * o.b + self.b * o.a + bb * c1)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        result = FqElem(self.p, self.degree, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def inverse(self) -> "FqElem":
        if self.is_zero():
            raise ZeroDivisionError(f"inverse of 0 in F_{self.q}")
        return self ** (self.q - 2)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def __bool__(self):
        return not self.is_zero()

    def is_square(self) -> bool:
        if self.is_zero() or self.p == 2:
            return True
        return self ** ((self.q - 1) // 2) == 1

    def __eq__(self, other):
        if isinstance(other, int):
            return self.b == 0 and self.a == other % self.p
        if isinstance(other, FqElem):
            return (self.p, self.degree, self.a, self.b) == (other.p, other.degree, other.a, other.b)
        return NotImplemented

    def __hash__(self):
        return hash((self.p, self.degree, self.a, self.b))

    def __str__(self):
        if self.degree == 1 or self.b == 0:
            return str(self.a)
        return f"{self.a}+{self.b}*t" if self.a else f"{self.b}*t"


@dataclass(frozen=True)
class FiniteField:
    p: int
    degree: int = 1

    @property
    def q(self) -> int:
        return self.p ** self.degree

    def __call__(self, a: int, b: int = 0) -> FqElem:
        return FqElem(self.p, self.degree, a, b)

    def elements(self) -> Iterator[FqElem]:
        for b in range(self.p if self.degree == 2 else 1):
            for a in range(self.p):
                yield FqElem(self.p, self.degree, a, b)

    def nonzero(self) -> Iterator[FqElem]:
        for z in self.elements():
            if z:
                yield z


# ---------------------------------------------------------------------------
# Prime splitting and reduction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PrimeSplitting:
    """
    How the rational prime ell decomposes in K.

    root is the image of sqrt(-d) in F_ell for split and ramified primes
    (for split ell the canonical "first" root with 0 < u < ell/2).
    """
    ell: int
    kind: str
    root: Optional[int]
    residue_degree: int
    d: int = 0

    @property
    def norm(self) -> int:
        return self.ell ** self.residue_degree


def splitting_type(ell: int, d: int) -> PrimeSplitting:
    if not isprime(ell):
        raise ValueError(f"{ell} is not prime")
    _checked_d(d)
    disc = field_discriminant(d)

    if disc % ell == 0:
        return PrimeSplitting(ell, RAMIFIED, (-d) % ell if ell == 2 else 0, 1, d)

    if kronecker(disc, ell) == 1:
        if ell == 2:
            return PrimeSplitting(2, SPLIT, 1, 1, d)
        roots = sqrt_mod((-d) % ell, ell, all_roots=True)
        root = min(r for r in roots if 0 < 2 * r < ell)
        return PrimeSplitting(ell, SPLIT, root, 1, d)

    return PrimeSplitting(ell, INERT, None, 2, d)


def residue_field(P: PrimeSplitting) -> FiniteField:
    return FiniteField(P.ell, P.residue_degree)


def _reduce_rational(r: Fraction, ell: int) -> int:
    if r.denominator % ell == 0:
        raise NonIntegralReduction(f"{r} has a denominator divisible by {ell}")
    return r.numerator * pow(r.denominator, -1, ell) % ell


@lru_cache(maxsize=None)
def _inert_scale(ell: int, d: int) -> int:
    """lam with (lam*t)^2 = -d in F_{ell^2} where t^2 = s"""
    s, _ = quadratic_modulus(ell)
    target = (-d) * pow(s, -1, ell) % ell
    return min(sqrt_mod(target, ell, all_roots=True))


def reduce_quad(z: QuadElem, P: PrimeSplitting, conjugate_choice: bool = False) -> FqElem:
    """
    Image of z under O_K -> O_K / l for the prime l above P.ell.

    conjugate_choice selects the conjugate ideal (split) or the Frobenius
    conjugate embedding (inert).
    """
    ell = P.ell
    if ell == 2 and z.d % 4 == 3:
        return _reduce_via_omega(z, P, conjugate_choice)

    x = _reduce_rational(z.x, ell)
    y = _reduce_rational(z.y, ell)
    if P.kind == SPLIT:
        u = -P.root if conjugate_choice else P.root
        return FqElem(ell, 1, x + y * u)
    if P.kind == RAMIFIED:
        return FqElem(ell, 1, x + y * P.root)

    lam = _inert_scale(ell, z.d)
    if conjugate_choice:
        lam = -lam
    return FqElem(ell, 2, x, y * lam)


def _reduce_via_omega(z: QuadElem, P: PrimeSplitting, conjugate_choice: bool) -> FqElem:
    # z = (x - y) + 2y * omega with omega = (1 + sqrt(-d))/2
    alpha = _reduce_rational(z.x - z.y, 2)
    beta = _reduce_rational(2 * z.y, 2)
    if P.kind == SPLIT:
        omega = 1 if conjugate_choice else 0
        return FqElem(2, 1, alpha + beta * omega)
    # inert: omega is a root of t^2 + t + 1; the other root is t + 1
    return FqElem(2, 2, alpha + (beta if conjugate_choice else 0), beta)


@dataclass(frozen=True)
class PrimeIdeal:
    """A prime of K: the splitting data plus which conjugate is meant"""
    splitting: PrimeSplitting
    conjugate: bool = False

    @property
    def ell(self) -> int:
        return self.splitting.ell

    @property
    def norm(self) -> int:
        return self.splitting.norm

    @property
    def label(self) -> str:
        tag = f"p{self.ell}"
        if self.splitting.kind == SPLIT:
            tag += "bar" if self.conjugate else ""
        return tag

    def reduce(self, z: QuadElem) -> FqElem:
        return reduce_quad(z, self.splitting, self.conjugate)


def primes_above(P: PrimeSplitting) -> List[PrimeIdeal]:
    if P.kind == SPLIT:
        return [PrimeIdeal(P, False), PrimeIdeal(P, True)]
    return [PrimeIdeal(P, False)]


def prime_ideals_up_to(d: int, bound: int) -> List[PrimeIdeal]:
    """Prime ideals of K of norm <= bound in scan order (norm, ell, first/conjugate)"""
    ideals: List[PrimeIdeal] = []
    for ell in primerange(2, bound + 1):
        P = splitting_type(ell, d)
        if P.norm <= bound:
            ideals.extend(primes_above(P))
    ideals.sort(key=lambda I: (I.norm, I.ell, I.conjugate))
    return ideals


# ---------------------------------------------------------------------------
# Number fields Q[x]/(phi) for Hecke eigenvalues
# ---------------------------------------------------------------------------

_X = Symbol("x")


def _to_sympy_rational(c: Fraction) -> sympy.Rational:
    return sympy.Rational(c.numerator, c.denominator)


def _to_fraction(c) -> Fraction:
    c = sympy.nsimplify(c) if not isinstance(c, sympy.Rational) else c
    return Fraction(int(c.p), int(c.q))


@dataclass(frozen=True)
class NumberFieldElem:
    """
    Element of Q[x]/(phi).

    poly: monic defining polynomial, descending integer coefficients
          ((1, 0, -3) is x^2 - 3, (1, 0) is x for the rational field)
    coords: power-basis coordinates 1, x, x^2, ... (ascending)
    """
    poly: Tuple[int, ...]
    coords: Tuple[Fraction, ...]

    def __post_init__(self):
        poly = tuple(int(c) for c in self.poly)
        if not poly or poly[0] != 1:
            raise ValueError(f"defining polynomial must be monic, got {poly}")
        n = len(poly) - 1
        coords = tuple(_as_fraction(c) for c in self.coords)
        if len(coords) > n:
            if any(coords[n:]):
                raise ValueError(f"{len(coords)} coordinates for a degree-{n} field")
            coords = coords[:n]
        coords = coords + (Fraction(0),) * (n - len(coords))
        object.__setattr__(self, "poly", poly)
        object.__setattr__(self, "coords", coords)

    @property
    def degree(self) -> int:
        return len(self.poly) - 1

    @classmethod
    def from_rational(cls, poly: Sequence[int], value: Rational) -> "NumberFieldElem":
        return cls(tuple(poly), (_as_fraction(value),))

    def _phi(self) -> Poly:
        return Poly(list(self.poly), _X, domain=QQ)

    def _as_poly(self) -> Poly:
        return Poly([_to_sympy_rational(c) for c in reversed(self.coords)], _X, domain=QQ)

    @classmethod
    def _from_poly(cls, poly: Sequence[int], p: Poly) -> "NumberFieldElem":
        coeffs = [_to_fraction(c) for c in reversed(p.all_coeffs())]
        return cls(tuple(poly), tuple(coeffs))

    def _coerce(self, other) -> Optional["NumberFieldElem"]:
        if isinstance(other, NumberFieldElem):
            if other.poly != self.poly:
                raise ValueError("number field elements over different fields")
            return other
        if isinstance(other, (int, Fraction)):
            return NumberFieldElem.from_rational(self.poly, other)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return NumberFieldElem(self.poly, tuple(a + b for a, b in zip(self.coords, o.coords)))

    __radd__ = __add__

    def __neg__(self):
        return NumberFieldElem(self.poly, tuple(-a for a in self.coords))

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if self.degree == 1:
            return NumberFieldElem(self.poly, (self.coords[0] * o.coords[0],))
        product = (self._as_poly() * o._as_poly()).rem(self._phi())
        return NumberFieldElem._from_poly(self.poly, product)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative powers are not needed here")
        result = NumberFieldElem.from_rational(self.poly, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def is_zero(self) -> bool:
        return not any(self.coords)

    def is_rational(self) -> bool:
        return not any(self.coords[1:])

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.is_rational() and self.coords[0] == other
        if isinstance(other, NumberFieldElem):
            return (self.poly, self.coords) == (other.poly, other.coords)
        return NotImplemented

    def __hash__(self):
        return hash((self.poly, self.coords))

    def embeddings(self, digits: int = 30) -> List[complex]:
        """Numeric values of this element at every root of phi"""
        if self.degree == 1:
            return [complex(float(self.coords[0]))]
        values = []
        for root in self._phi().nroots(n=digits):
            value = sum(complex(_to_sympy_rational(c)) * complex(root) ** k
                        for k, c in enumerate(self.coords))
            values.append(value)
        return values

    def __str__(self):
        if self.is_rational():
            return str(self.coords[0])
        return str(self._as_poly().as_expr())


def nf_norm(alpha: NumberFieldElem) -> Fraction:
    """Norm from Q[x]/(phi) to Q, computed as Res(phi, a(x)) for monic phi"""
    if alpha.is_zero():
        return Fraction(0)
    if alpha.is_rational():
        return alpha.coords[0] ** alpha.degree
    res = alpha._phi().resultant(alpha._as_poly())
    return _to_fraction(sympy.Rational(res))
