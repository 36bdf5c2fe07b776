"""Exact arithmetic in Q(√a) and the quadratic norm questions over Q.

Norm membership is decided by Hilbert symbols (Hasse–Minkowski for the
form u² − a v² = c z²).  Witnesses are searched for separately and are
only ever used as supporting evidence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

from .errors import InvalidPlace, NotAPthPower, Undecided
from .tower import TowerContext

TRIAL_LIMIT = 10 ** 6
WITNESS_BOUND = 10 ** 4
WITNESS_BUDGET = 2 * 10 ** 6

Rational = Fraction | int


def factor(n: int) -> dict[int, int]:
    """Prime factorization of |n| by trial division up to 10^6."""
    n = abs(n)
    if n == 0:
        raise ValueError("cannot factor 0")
    out: dict[int, int] = {}
    d = 2
    while d * d <= n and d <= TRIAL_LIMIT:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        if n > TRIAL_LIMIT ** 2:
            raise ValueError(f"cofactor {n} is beyond the trial-division range")
        out[n] = out.get(n, 0) + 1
    return out


def squarefree_part(n: int) -> int:
    sign = -1 if n < 0 else 1
    out = 1
    for q, e in factor(n).items():
        if e % 2:
            out *= q
    return sign * out


def is_squarefree(n: int) -> bool:
    return n != 0 and all(e == 1 for e in factor(n).values())


def rational_sqrt(q: Rational) -> Fraction | None:
    q = Fraction(q)
    if q < 0:
        return None
    n, d = q.numerator, q.denominator
    rn, rd = math.isqrt(n), math.isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


@dataclass(frozen=True)
class QuadElement:
    """u + v√a with u, v rational."""

    u: Fraction
    v: Fraction
    a: int

    def __post_init__(self):
        object.__setattr__(self, "u", Fraction(self.u))
        object.__setattr__(self, "v", Fraction(self.v))

    def _check(self, other: QuadElement) -> None:
        if other.a != self.a:
            raise TypeError(f"elements of Q(√{self.a}) and Q(√{other.a}) do not mix")

    def _coerce(self, other):
        if isinstance(other, QuadElement):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction)):
            return QuadElement(Fraction(other), Fraction(0), self.a)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return QuadElement(self.u + other.u, self.v + other.v, self.a)

    __radd__ = __add__

    def __neg__(self):
        return QuadElement(-self.u, -self.v, self.a)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return QuadElement(self.u * other.u + self.a * self.v * other.v,
                           self.u * other.v + self.v * other.u, self.a)

    __rmul__ = __mul__

    def conjugate(self) -> QuadElement:
        return QuadElement(self.u, -self.v, self.a)

    def norm(self) -> Fraction:
        return self.u * self.u - self.a * self.v * self.v

    def is_zero(self) -> bool:
        return self.u == 0 and self.v == 0

    def inverse(self) -> QuadElement:
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("zero has no inverse")
        return QuadElement(self.u / n, -self.v / n, self.a)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        result = QuadElement(Fraction(1), Fraction(0), self.a)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            base = base * base
        return result

    def to_text(self) -> str:
        return f"{self.u}+{self.v}*sqrt({self.a})"


def norm(gamma: QuadElement) -> Fraction:
    return gamma.norm()


def is_square(gamma: QuadElement) -> tuple[bool, tuple[Fraction, Fraction] | None]:
    """Whether gamma = (s + t√a)^2, with a witness (s, t) when it is."""
    if gamma.is_zero():
        raise ValueError("zero is excluded from the square test")
    n = rational_sqrt(gamma.norm())
    if n is None:
        return False, None
    u, v, a = gamma.u, gamma.v, gamma.a
    if v == 0:
        s = rational_sqrt(u)
        if s is not None:
            return True, (s, Fraction(0))
        t = rational_sqrt(u / a)
        if t is not None:
            return True, (Fraction(0), t)
        return False, None
    for m in (n, -n):
        s = rational_sqrt((u + m) / 2)
        if s:
            t = v / (2 * s)
            if QuadElement(s, t, a) ** 2 == gamma:
                return True, (s, t)
    return False, None


def _place_key(place) -> int | str:
    if isinstance(place, str):
        if place.lower() in ("inf", "infinity", "real", "oo"):
            return "inf"
        try:
            place = int(place)
        except ValueError:
            raise InvalidPlace(f"unknown place {place!r}") from None
    if isinstance(place, int) and place >= 2 and all(place % d for d in range(2, math.isqrt(place) + 1)):
        return place
    raise InvalidPlace(f"{place!r} is neither a prime nor the real place")


def _square_class_int(x: Rational) -> int:
    x = Fraction(x)
    if x == 0:
        raise ValueError("Hilbert symbol arguments must be nonzero")
    return x.numerator * x.denominator


def _split(n: int, q: int) -> tuple[int, int]:
    k = 0
    while n % q == 0:
        n //= q
        k += 1
    return k, n


def legendre(x: int, q: int) -> int:
    r = pow(x % q, (q - 1) // 2, q)
    return -1 if r == q - 1 else r


def hilbert_symbol(b: Rational, c: Rational, place) -> int:
    """Quadratic Hilbert symbol (b, c)_v at a prime v or the real place."""
    key = _place_key(place)
    b, c = _square_class_int(b), _square_class_int(c)
    if key == "inf":
        return -1 if b < 0 and c < 0 else 1
    q = key
    alpha, u = _split(b, q)
    beta, w = _split(c, q)
    if q != 2:
        sign = -1 if (alpha * beta * ((q - 1) // 2)) % 2 else 1
        return sign * legendre(u, q) ** (beta % 2) * legendre(w, q) ** (alpha % 2)

    def eps(x):
        return ((x - 1) // 2) % 2

    def omega(x):
        return ((x * x - 1) // 8) % 2

    e = eps(u) * eps(w) + alpha * omega(w) + beta * omega(u)
    return -1 if e % 2 else 1


def relevant_places(*xs: Rational) -> list:
    primes = {2}
    for x in xs:
        primes |= set(factor(_square_class_int(x)))
    return sorted(primes) + ["inf"]


def hilbert_product(b: Rational, c: Rational) -> int:
    """Product of (b, c)_v over all places (every other place contributes +1)."""
    out = 1
    for v in relevant_places(b, c):
        out *= hilbert_symbol(b, c, v)
    return out


def is_norm(c: Rational, a: int) -> bool:
    """Whether c is a norm from Q(√a), decided by local symbols."""
    c = Fraction(c)
    if c == 0:
        raise ValueError("0 is excluded")
    if rational_sqrt(a) is not None:
        return True
    return all(hilbert_symbol(c, a, v) == 1 for v in relevant_places(c, a))


def _heights() -> Iterator[tuple[int, int]]:
    """(y, z) with z ≥ 1, y ≥ 0, in order of max(y, z)."""
    h = 1
    while True:
        for z in range(1, h + 1):
            yield h, z
        for y in range(0, h):
            yield y, h
        h += 1


def norm_witness(c: Rational, a: int, bound: int = WITNESS_BOUND,
                 budget: int = WITNESS_BUDGET) -> tuple[Fraction, Fraction] | None:
    """Some (u, v) with u² − a v² = c, searched in height order."""
    c = Fraction(c)
    for k, (y, z) in enumerate(_heights()):
        if k >= budget or max(y, z) > bound:
            return None
        rhs = c * z * z + a * y * y
        x = rational_sqrt(rhs)
        if x is not None:
            u, v = x / z, Fraction(y, z)
            if u * u - a * v * v == c:
                return u, v


def minus_one_is_norm(a: int) -> tuple[bool, tuple[Fraction, Fraction] | None]:
    ok = is_norm(-1, a)
    return ok, (norm_witness(-1, a) if ok else None)


def inert_prime(a: int, start: int = 3) -> int:
    """Smallest odd prime q ≥ start with q ∤ a and a a non-residue mod q."""
    q = start
    while True:
        if all(q % d for d in range(2, math.isqrt(q) + 1)) and q > 2 and a % q and legendre(a, q) == -1:
            return q
        q += 1


class QuadraticTower(TowerContext):
    """F = Q, K = Q(√a), p = 2.  J is infinite here."""

    finite = False

    def __init__(self, a: int):
        if a in (0, 1) or not is_squarefree(a):
            raise ValueError(f"a = {a} must be a squarefree integer other than 0 and 1")
        self.p = 2
        self.a_int = a
        self.a = Fraction(a)
        self.zeta = Fraction(-1)
        self.root_a = QuadElement(Fraction(0), Fraction(1), a)

    def element(self, u: Rational, v: Rational = 0) -> QuadElement:
        return QuadElement(Fraction(u), Fraction(v), self.a_int)

    def one(self):
        return self.element(1)

    def F_one(self):
        return Fraction(1)

    def sigma(self, x):
        return x.conjugate()

    def norm(self, x):
        return x.norm()

    def to_F(self, x):
        if x.v != 0:
            raise ValueError("element is not rational")
        return x.u

    def embed(self, f):
        return self.element(f)

    def is_pth_power(self, x) -> bool:
        return is_square(x)[0]

    def F_is_pth_power(self, f) -> bool:
        return rational_sqrt(f) is not None

    def F_pth_root(self, f):
        r = rational_sqrt(f)
        if r is None:
            raise NotAPthPower(f"{f} is not a rational square")
        return r

    def basis_over_F(self) -> list:
        return [self.one(), self.root_a]

    def eq(self, x, y) -> bool:
        return x == y

    def describe(self) -> dict:
        return {"p": 2, "F": "Q", "a": self.a_int}


@dataclass(frozen=True)
class QuadraticCorollary1:
    upsilon: int
    minus_one_witness: tuple | None
    free: bool
    inert_witness: int
    no_free_summand: bool | str
    norm_witness: tuple | None
    g_invariant: bool | str

    def to_json(self) -> dict:
        def fmt(w):
            return None if w is None else [str(x) for x in w]
        return {"upsilon": self.upsilon, "minus_one_witness": fmt(self.minus_one_witness),
                "free": self.free, "inert_witness": self.inert_witness,
                "no_free_summand": self.no_free_summand, "norm_witness": fmt(self.norm_witness),
                "g_invariant": self.g_invariant}


def corollary1_quadratic(a: int) -> QuadraticCorollary1:
    """Freeness predicates for Q(√a)/Q, decided where this is possible.

    J is free only if Q× = N ∪ −N; an inert prime q gives (±q, a)_q = −1,
    so that never holds.  J has no free summand iff every norm lies in
    ⟨a⟩·Q×²; a norm outside that group settles the answer, otherwise it is
    left undecided.
    """
    ups, wit = minus_one_is_norm(a)
    q = inert_prime(a)
    if is_norm(q, a) or is_norm(-q, a):
        raise Undecided("inert prime unexpectedly represented by the norm form")
    witness = None
    for k in range(0, 64):
        x = Fraction(k * k - a)
        if x != 0 and rational_sqrt(x) is None and rational_sqrt(x / a) is None:
            witness = (Fraction(k), Fraction(1))
            break
    nfs: bool | str = False if witness is not None else "undecided"
    return QuadraticCorollary1(int(ups), wit, False, q, nfs, witness, nfs)
