"""Truncated ell-adic arithmetic for Kummer towers F ⊂ K = F(a^(1/p)).

Supported bases: F = Q_ell with p | ell - 1, F = Q_2 for p = 2, and
F = Q_3(zeta_3) for p = 3.  Elements are stored in the Kummer basis
zeta^i y^j (y^p = a) over Q_ell as an integer vector with a common power of
ell and a relative precision.  Valuations and residues are read off after a
change of coordinates to an explicit integral basis whose members have known
valuations, and classes modulo p-th powers are computed by peeling digits
level by level through the unit filtration.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import (APthPower, BackendFailure, NotAPthPower, PrecisionExhausted,
                     UnsupportedConfiguration)
from .structure import InvariantProfile, measure_profile
from .tower import JPresentation, TowerContext

DEFAULT_PRECISION = 40
MAX_PRECISION = 640
_GUARD = 24


def default_precision() -> int:
    env = os.environ.get("PCLASS_PRECISION")
    return int(env) if env else DEFAULT_PRECISION


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


def vell(n: int, ell: int) -> int:
    """ell-adic valuation of a nonzero integer."""
    k = 0
    while n % ell == 0:
        n //= ell
        k += 1
    return k


def teichmuller(r: int, ell: int, digits: int) -> int:
    mod = ell ** digits
    return pow(r, ell ** (digits - 1), mod) if r % ell else 0


class LocalElement:
    """ell^s * (c + O(ell^r)) coordinatewise in the Kummer basis of `field`."""

    __slots__ = ("field", "s", "c", "r")

    def __init__(self, field: LocalField, s: int, c: Sequence[int], r: int):
        self.field = field
        ell = field.ell
        if r <= 0:
            self.s, self.c, self.r = s + max(r, 0), (0,) * field.n, 0
            return
        mod = ell ** r
        c = [x % mod for x in c]
        g = None
        for x in c:
            if x:
                k = vell(x, ell)
                g = k if g is None else min(g, k)
                if g == 0:
                    break
        if g is None:
            self.s, self.c, self.r = s + r, (0,) * field.n, 0
        elif g:
            q = ell ** g
            self.s, self.c, self.r = s + g, tuple(x // q for x in c), r - g
        else:
            self.s, self.c, self.r = s, tuple(c), r

    @property
    def absprec(self) -> int:
        return self.s + self.r

    def is_zero(self) -> bool:
        return self.r == 0

    def _coerce(self, other) -> LocalElement:
        if isinstance(other, LocalElement):
            if other.field is not self.field:
                if other.field is self.field.base:
                    return self.field.embed(other)
                raise TypeError("elements of different local fields")
            return other
        if isinstance(other, int):
            return self.field.from_int(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        ell = self.field.ell
        s = min(self.s, other.s)
        a = min(self.absprec, other.absprec)
        k1, k2 = ell ** (self.s - s), ell ** (other.s - s)
        return LocalElement(self.field, s, [x * k1 + y * k2 for x, y in zip(self.c, other.c)], a - s)

    __radd__ = __add__

    def __neg__(self):
        return LocalElement(self.field, self.s, [-x for x in self.c], self.r)

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
        r = min(self.r, other.r)
        if r == 0:
            return LocalElement(self.field, min(self.absprec + other.s, other.absprec + self.s), (), 0)
        return LocalElement(self.field, self.s + other.s,
                            self.field._mul_coords(self.c, other.c, self.field.ell ** r), r)

    __rmul__ = __mul__

    def inverse(self) -> LocalElement:
        return self.field.inverse(self)

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
        result = self.field.one()
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def __eq__(self, other) -> bool:
        other = self._coerce(other)
        if other is NotImplemented:
            return False
        return (self - other).is_zero()

    __hash__ = None

    def __repr__(self) -> str:
        return f"LocalElement({self.field.name}, s={self.s}, c={self.c}, r={self.r})"

    def to_text(self, digits: int | None = None) -> str:
        return self.field.to_text(self, digits)


class ResidueField:
    """F_ell[x]/(g) for a monic irreducible g; elements are coefficient tuples."""

    def __init__(self, ell: int, g: Sequence[int]):
        self.ell = ell
        self.g = tuple(x % ell for x in g)
        self.f = len(g) - 1
        self.q = ell ** self.f

    def zero(self):
        return (0,) * self.f

    def one(self):
        return (1,) + (0,) * (self.f - 1)

    def elements(self):
        return [tuple(t) for t in itertools.product(range(self.ell), repeat=self.f)]

    def add(self, x, y):
        return tuple((a + b) % self.ell for a, b in zip(x, y))

    def sub(self, x, y):
        return tuple((a - b) % self.ell for a, b in zip(x, y))

    def scale(self, x, k: int):
        return tuple((a * k) % self.ell for a in x)

    def mul(self, x, y):
        ell, f = self.ell, self.f
        prod = [0] * (2 * f - 1)
        for i, a in enumerate(x):
            if a:
                for j, b in enumerate(y):
                    prod[i + j] += a * b
        for k in range(2 * f - 2, f - 1, -1):
            t = prod[k] % ell
            if t:
                for i in range(f):
                    prod[k - f + i] -= t * self.g[i]
        return tuple(v % ell for v in prod[:f])

    def pow(self, x, e: int):
        result = self.one()
        base = x
        if e < 0:
            base, e = self.inv(x), -e
        while e:
            if e & 1:
                result = self.mul(result, base)
            e >>= 1
            if e:
                base = self.mul(base, base)
        return result

    def inv(self, x):
        if not any(x):
            raise ZeroDivisionError("zero in residue field")
        return self.pow(x, self.q - 2)

    def is_pth_power(self, x, p: int) -> bool:
        if (self.q - 1) % p:
            return True
        return self.pow(x, (self.q - 1) // p) == self.one()

    def non_pth_power(self, p: int):
        for x in self.elements():
            if any(x) and not self.is_pth_power(x, p):
                return x
        raise ValueError("every element is a p-th power")

    def pth_root(self, x, p: int):
        """Some y with y^p = x (x must be a p-th power)."""
        if not any(x):
            return x
        if (self.q - 1) % p:
            # Frobenius-type bijection: invert p modulo q - 1
            return self.pow(x, pow(p, -1, self.q - 1))
        if not self.is_pth_power(x, p):
            raise NotAPthPower("residue is not a p-th power")
        n, k = self.q - 1, 0
        m = n
        while m % p == 0:
            m //= p
            k += 1
        u = pow(p, -1, m) if m > 1 else 0
        y0 = self.pow(x, u)
        h = self.pow(self.non_pth_power(p), m)
        target = self.mul(x, self.inv(self.pow(y0, p)))
        hp = self.pow(h, p)
        acc = self.one()
        for j in range(p ** k):
            if acc == target:
                return self.mul(y0, self.pow(h, j))
            acc = self.mul(acc, hp)
        raise BackendFailure("p-th root search in residue field failed")

    def encode(self, x) -> int:
        return sum(a * self.ell ** i for i, a in enumerate(x))


def _frac_inverse(mat: list[list[Fraction]]) -> list[list[Fraction]]:
    n = len(mat)
    a = [row[:] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(mat)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            raise BackendFailure("integral basis matrix is singular")
        a[col], a[piv] = a[piv], a[col]
        inv = 1 / a[col][col]
        a[col] = [x * inv for x in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [row[n:] for row in a]


class LocalField:
    """Q_ell[zeta]/(h) (degree d over Q_ell) extended by y with y^m = a.

    With m = 1 this is a base field F; with m = p it is K = F(a^(1/p)) and
    `base` points at F.
    """

    def __init__(self, ell: int, p: int, prec: int, d: int, m: int,
                 a: Sequence[int] = (0,), zeta: Sequence[int] = (1,),
                 base: LocalField | None = None, name: str = "F"):
        self.ell, self.p, self.prec = ell, p, prec
        self.d, self.m, self.n = d, m, d * m
        self.cap = prec + _GUARD
        self.mod = ell ** self.cap
        self.base = base
        self.name = name
        self.a = tuple(x % self.mod for x in a)
        self.zeta = tuple(x % self.mod for x in zeta)
        self._table = self._build_table()
        self._sigma_table = self._build_sigma() if m > 1 else None
        self._structured = False

    # -- raw algebra -------------------------------------------------------

    def _fmul(self, x: Sequence[int], y: Sequence[int]) -> list[int]:
        if self.d == 1:
            return [x[0] * y[0]]
        # zeta^2 = -1 - zeta
        x0, x1 = x
        y0, y1 = y
        t = x1 * y1
        return [x0 * y0 - t, x0 * y1 + x1 * y0 - t]

    def _basis_product(self, i: int, j: int) -> list[int]:
        d, m = self.d, self.m
        ji, zi = divmod(i, d)
        jj, zj = divmod(j, d)
        zv1 = [int(k == zi) for k in range(d)]
        zv2 = [int(k == zj) for k in range(d)]
        fz = self._fmul(zv1, zv2)
        deg = ji + jj
        out = [0] * self.n
        if deg >= m:
            fz = self._fmul(fz, self.a)
            deg -= m
        for k in range(d):
            out[deg * d + k] = fz[k] % self.mod
        return out

    def _build_table(self):
        table = []
        for i in range(self.n):
            row = []
            for j in range(self.n):
                vec = self._basis_product(i, j)
                row.append(tuple((k, v) for k, v in enumerate(vec) if v))
            table.append(row)
        return table

    def _build_sigma(self):
        out = []
        zpow = [1] + [0] * (self.d - 1)
        for j in range(self.m):
            for i in range(self.d):
                unit = [int(k == i) for k in range(self.d)]
                img = self._fmul(unit, zpow)
                out.append(tuple((j * self.d + k, v % self.mod) for k, v in enumerate(img) if v % self.mod))
            zpow = [v % self.mod for v in self._fmul(zpow, self.zeta)]
        return out

    def _mul_coords(self, c1, c2, mod: int) -> list[int]:
        out = [0] * self.n
        table = self._table
        for i, x in enumerate(c1):
            if x:
                row = table[i]
                for j, yv in enumerate(c2):
                    if yv:
                        xy = x * yv
                        for k, t in row[j]:
                            out[k] += xy * t
        return out

    def _linear(self, table, c) -> list[int]:
        out = [0] * self.n
        for i, x in enumerate(c):
            if x:
                for k, t in table[i]:
                    out[k] += x * t
        return out

    # -- constructors ------------------------------------------------------

    def from_int(self, n: int | Fraction) -> LocalElement:
        if isinstance(n, Fraction):
            return self.from_int(n.numerator) / self.from_int(n.denominator)
        if n == 0:
            return LocalElement(self, self.prec, (), 0)
        v = vell(n, self.ell)
        c = [0] * self.n
        c[0] = n // self.ell ** v
        return LocalElement(self, v, c, self.prec)

    def from_coords(self, coords: Sequence[int | Fraction]) -> LocalElement:
        """Exact rational Kummer coordinates."""
        fr = [Fraction(x) for x in coords]
        den = 1
        for x in fr:
            den = den * x.denominator // _gcd(den, x.denominator)
        ints = [int(x * den) for x in fr]
        el = LocalElement(self, 0, ints, self.prec + max((vell(x, self.ell) for x in ints if x), default=0))
        el = LocalElement(self, el.s, el.c, min(el.r, self.prec))
        return el * self.from_int(Fraction(1, den)) if den != 1 else el

    def one(self) -> LocalElement:
        return self.from_int(1)

    def zeta_element(self) -> LocalElement:
        c = [0] * self.n
        c[: self.d] = self.zeta
        return LocalElement(self, 0, c, self.prec)

    def gen(self) -> LocalElement:
        """y (or zeta for a degree-2 base, 1 otherwise)."""
        c = [0] * self.n
        if self.m > 1:
            c[self.d] = 1
        elif self.d > 1:
            c[1] = 1
        else:
            c[0] = 1
        return LocalElement(self, 0, c, self.prec)

    def embed(self, f: LocalElement) -> LocalElement:
        if f.field is self:
            return f
        if f.field is not self.base:
            raise TypeError("can only embed elements of the base field")
        c = [0] * self.n
        c[: self.d] = f.c
        return LocalElement(self, f.s, c, f.r)

    def with_precision(self, x: LocalElement, r: int) -> LocalElement:
        return LocalElement(self, x.s, x.c, min(x.r, r))

    # -- sigma, norms, inverse ---------------------------------------------

    def sigma(self, x: LocalElement) -> LocalElement:
        if self._sigma_table is None:
            return x
        return LocalElement(self, x.s, self._linear(self._sigma_table, x.c), x.r)

    def _base_part(self, x: LocalElement, check: bool = True) -> LocalElement:
        if check and any(x.c[self.d:]):
            raise BackendFailure("norm has components outside the base field")
        return LocalElement(self.base, x.s, x.c[: self.d], x.r)

    def norm_to_base(self, x: LocalElement) -> LocalElement:
        if self.m == 1:
            return x
        prod = x
        conj = x
        for _ in range(self.p - 1):
            conj = self.sigma(conj)
            prod = prod * conj
        return self._base_part(prod)

    def _f_conj(self, x: LocalElement) -> LocalElement:
        # zeta -> zeta^2 = -1 - zeta on Q_ell[zeta], only used when d == 2
        x0, x1 = x.c[0], x.c[1]
        return LocalElement(self, x.s, [x0 - x1, -x1] + [0] * (self.n - 2), x.r)

    def _scalar_inverse(self, x: LocalElement) -> LocalElement:
        if x.is_zero():
            raise PrecisionExhausted("inverting an element that is zero to working precision")
        if any(x.c[1:]):
            raise BackendFailure("expected a rational scalar")
        u = x.c[0]
        v = vell(u, self.ell)
        mod = self.ell ** x.r
        unit = u // self.ell ** v
        c = [0] * self.n
        c[0] = pow(unit, -1, mod)
        return LocalElement(self, -x.s - v, c, x.r - v)

    def _base_inverse(self, x: LocalElement) -> LocalElement:
        """Inverse of an element whose y-components vanish."""
        if self.d == 1:
            return self._scalar_inverse(x)
        xb = self._f_conj(x)
        q = x * xb
        q = LocalElement(self, q.s, [q.c[0]] + [0] * (self.n - 1), q.r)
        return xb * self._scalar_inverse(q)

    def inverse(self, x: LocalElement) -> LocalElement:
        if x.is_zero():
            raise PrecisionExhausted("inverting an element that is zero to working precision")
        if self.m == 1 or not any(x.c[self.d:]):
            return self._base_inverse(x)
        conj = self.one()
        t = x
        for _ in range(self.p - 1):
            t = self.sigma(t)
            conj = conj * t
        nrm = x * conj
        nrm = LocalElement(self, nrm.s, list(nrm.c[: self.d]) + [0] * (self.n - self.d), nrm.r)
        return conj * self._base_inverse(nrm)

    def norm_to_qell(self, x: LocalElement) -> LocalElement:
        """Absolute norm, as an element of this field with only a rational coordinate."""
        y = x if self.m == 1 else self.embed(self.norm_to_base(x))
        if self.d == 2:
            y = y * self._f_conj(y)
        return y

    # -- integral structure -------------------------------------------------

    def set_structure(self, basis: Sequence[LocalElement], offsets: Sequence[int],
                      res_index: Sequence[int], e: int, g: Sequence[int],
                      uniformizer: LocalElement, pi_power=None) -> None:
        ell = self.ell
        self.e = e
        self.resfield = ResidueField(ell, g)
        self.f = self.resfield.f
        if e * self.f != self.n:
            raise BackendFailure(f"e*f = {e * self.f} does not match degree {self.n}")
        cols = []
        for b in basis:
            scale = Fraction(ell) ** b.s
            cols.append([Fraction(x) * scale for x in b.c])
        pmat = [[cols[j][i] for j in range(self.n)] for i in range(self.n)]
        pinv = _frac_inverse(pmat)
        vals = [_frac_val(x, ell) for row in pinv for x in row if x != 0]
        t = min(vals)
        self._pinv_shift = t
        self._pinv = [[_frac_to_int(x, ell, t, self.mod) for x in row] for row in pinv]
        self._offsets = list(offsets)
        self._res_index = list(res_index)
        self._lifts = [None] * self.f
        for b, off, ri in zip(basis, offsets, res_index):
            if off == 0:
                self._lifts[ri] = b
        self.pi = uniformizer
        self.pi_inv = uniformizer.inverse()
        self._pi_power = pi_power
        self._pi_pows: dict[int, LocalElement] = {}
        self._structured = True
        if self.valuation(uniformizer) != 1:
            raise BackendFailure("uniformizer does not have valuation 1")
        self._setup_classes()

    def pi_pow(self, k: int) -> LocalElement:
        # Long chains of multiplications by pi^-1 shed a digit whenever the
        # product wraps through an ell-divisible structure constant, so powers
        # are built in closed form when the field allows it.
        x = self._pi_pows.get(k)
        if x is None:
            if self._pi_power is not None:
                x = self._pi_power(k)
            else:
                x = self.pi ** k if k >= 0 else self.pi_inv ** (-k)
            self._pi_pows[k] = x
        return x

    def _integral_coords(self, x: LocalElement) -> list[int]:
        mod = self.ell ** x.r
        return [sum(pr * c for pr, c in zip(row, x.c)) % mod for row in self._pinv]

    def valuation(self, x: LocalElement) -> int:
        if x.is_zero():
            raise PrecisionExhausted("valuation of an element that is zero to working precision")
        ys = self._integral_coords(x)
        sh = x.s + self._pinv_shift
        e = self.e
        best = None
        floor = None
        for y, off in zip(ys, self._offsets):
            if y:
                val = e * (sh + vell(y, self.ell)) + off
                best = val if best is None else min(best, val)
            else:
                lb = e * (sh + x.r) + off
                floor = lb if floor is None else min(floor, lb)
        if best is None or (floor is not None and floor <= best):
            raise PrecisionExhausted("valuation not determined at working precision")
        return best

    def residue(self, x: LocalElement):
        """Residue class of a unit (valuation exactly 0)."""
        ys = self._integral_coords(x)
        sh = x.s + self._pinv_shift
        ell = self.ell
        if sh < 0 and x.r < -sh + 1:
            raise PrecisionExhausted("residue not determined at working precision")
        out = [0] * self.f
        for y, off, ri in zip(ys, self._offsets, self._res_index):
            if off == 0:
                if sh >= 0:
                    out[ri] = (y * ell ** sh) % ell
                else:
                    q = ell ** (-sh)
                    if y % q:
                        raise BackendFailure("residue requested for a non-integral element")
                    out[ri] = (y // q) % ell
        return tuple(out)

    def lift(self, rbar) -> LocalElement:
        acc = LocalElement(self, self.prec, (), 0)
        for coef, b in zip(rbar, self._lifts):
            if coef:
                acc = acc + b * coef
        if acc.is_zero():
            return acc
        return LocalElement(self, acc.s, acc.c, min(acc.r, self.prec))

    def lead(self, x: LocalElement, k: int):
        """Residue of x / pi^k for x of valuation k."""
        return self.residue(x * self.pi_pow(-k))

    # -- classes modulo p-th powers ------------------------------------------

    def _setup_classes(self) -> None:
        p, ell, rf = self.p, self.ell, self.resfield
        gens: list[LocalElement] = [self.pi]
        labels: list[str] = ["pi"]
        self._level_index: dict[int, int] = {}
        if ell != p:
            self._r0 = rf.non_pth_power(p)
            self._eta = rf.pow(self._r0, (rf.q - 1) // p)
            self._eta_table = {rf.pow(self._eta, t): t for t in range(p)}
            gens.append(self.lift(self._r0))
            labels.append("teichmuller")
        else:
            if self.e % (p - 1):
                raise UnsupportedConfiguration("zeta_p must lie in the field")
            self.bound = p * self.e // (p - 1)
            self._rho = self.residue(self.from_int(p) * self.pi_pow(-self.e))
            basis_res = [tuple(int(i == j) for j in range(self.f)) for i in range(self.f)]
            for k in range(1, self.bound):
                if k % p:
                    self._level_index[k] = len(gens)
                    for i, bres in enumerate(basis_res):
                        gens.append(self.one() + self.lift(bres) * self.pi_pow(k))
                        labels.append(f"1+x^{i}*pi^{k}")
            phi = {}
            for x in rf.elements():
                val = rf.add(rf.pow(x, p), rf.mul(self._rho, x))
                phi.setdefault(val, x)
            self._beta = next(x for x in rf.elements() if x not in phi)
            self._special_split = {}
            for dd in range(p):
                shift = rf.scale(self._beta, dd)
                for val, x in phi.items():
                    self._special_split.setdefault(rf.add(val, shift), (x, dd))
            self._special_index = len(gens)
            gens.append(self.one() + self.lift(self._beta) * self.pi_pow(self.bound))
            labels.append("special")
        self.class_gens = gens
        self.class_labels = labels
        self._gen_inv_pows = []
        for g in gens:
            gi = g.inverse()
            pows = [self.one()]
            for _ in range(p - 1):
                pows.append(pows[-1] * gi)
            self._gen_inv_pows.append(pows)

    @property
    def class_dim(self) -> int:
        return len(self.class_gens)

    def _frob_inv(self, x):
        rf = self.resfield
        return rf.pow(x, rf.q // self.p)

    def _pth_power_of_unit(self, xbar, level: int) -> LocalElement:
        """(1 + lift(xbar) pi^level)^p."""
        t = self.one() + self.lift(xbar) * self.pi_pow(level)
        return t

    def decompose(self, x: LocalElement, want_root: bool = False, stop_early: bool = False):
        """Coordinates d with x = prod(gen_i^d_i) * r^p; also r when want_root."""
        p, rf = self.p, self.resfield
        coords = [0] * self.class_dim
        root = self.one() if want_root else None
        v = self.valuation(x)
        coords[0] = v % p
        if stop_early and coords[0]:
            return coords, None
        if want_root:
            root = root * self.pi_pow((v - coords[0]) // p)
        u = x * self.pi_pow(-v)
        rbar = self.residue(u)
        if self.ell != p:
            t = self._eta_table[rf.pow(rbar, (rf.q - 1) // p)]
            coords[1] = t
            if not want_root:
                return coords, None
            u = u * self._gen_inv_pows[1][t]
            x0 = self.lift(rf.pth_root(self.residue(u), p))
            return coords, root * self._newton_root(u, x0)
        sbar = self._frob_inv(rbar)
        xl = self.lift(sbar)
        u = u / xl ** p
        if want_root:
            root = root * xl
        e = self.e
        while True:
            diff = u - 1
            if diff.is_zero():
                break
            k = self.valuation(diff)
            cbar = self.lead(diff, k)
            if k > self.bound:
                if not want_root:
                    break
                if k > 2 * e:
                    root = root * self._newton_root(u, self.one())
                    break
                xbar = rf.mul(cbar, rf.inv(self._rho))
                t = self.one() + self.lift(xbar) * self.pi_pow(k - e)
                u = u / t ** p
                root = root * t
            elif k < self.bound and k % p:
                base = self._level_index[k]
                for i in range(self.f):
                    dd = cbar[i]
                    if dd:
                        coords[base + i] = dd
                        if stop_early:
                            return coords, None
                        u = u * self._gen_inv_pows[base + i][dd]
            elif k < self.bound:
                t = self.one() + self.lift(self._frob_inv(cbar)) * self.pi_pow(k // p)
                u = u / t ** p
                if want_root:
                    root = root * t
            else:
                xbar, dd = self._special_split[cbar]
                if any(xbar):
                    t = self.one() + self.lift(xbar) * self.pi_pow(e // (p - 1))
                    u = u / t ** p
                    if want_root:
                        root = root * t
                if dd:
                    coords[self._special_index] = dd
                    if stop_early:
                        return coords, None
                    u = u * self._gen_inv_pows[self._special_index][dd]
        return coords, root

    def _newton_root(self, u: LocalElement, x0: LocalElement) -> LocalElement:
        p = self.p
        x = x0
        for _ in range(2 * self.prec.bit_length() + 4):
            xp1 = x ** (p - 1)
            delta = (xp1 * x - u) / (xp1 * p)
            if delta.is_zero():
                break
            x = x - delta
            if x.r <= 2:
                raise PrecisionExhausted("Newton iteration ran out of precision")
        return x

    def class_coords(self, x: LocalElement) -> list[int]:
        return self.decompose(x)[0]

    def is_pth_power(self, x: LocalElement) -> bool:
        coords, _ = self.decompose(x, stop_early=True)
        return not any(coords)

    def pth_root(self, x: LocalElement) -> LocalElement:
        coords, root = self.decompose(x, want_root=True)
        if any(coords):
            raise NotAPthPower("element is not a p-th power")
        return root

    # -- canonical text ------------------------------------------------------

    def to_text(self, x: LocalElement, digits: int | None = None) -> str:
        if x.is_zero():
            return "val:inf;digits:"
        ndig = digits if digits is not None else 12
        v = self.valuation(x)
        u = x * self.pi_pow(-v)
        out = []
        for _ in range(ndig):
            if u.is_zero():
                out.append(0)
                u = u * self.pi_inv
                continue
            try:
                if self.valuation(u) > 0:
                    out.append(0)
                    u = u * self.pi_inv
                    continue
                d = self.residue(u)
            except PrecisionExhausted:
                break
            out.append(self.resfield.encode(d))
            u = (u - self.lift(d)) * self.pi_inv
        return f"val:{v};digits:{','.join(str(t) for t in out)}"


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


def _frac_val(x: Fraction, ell: int) -> int:
    return vell(x.numerator, ell) - vell(x.denominator, ell)


def _frac_to_int(x: Fraction, ell: int, shift: int, mod: int) -> int:
    """Integer congruent to x / ell^shift modulo mod (x / ell^shift must be integral)."""
    if x == 0:
        return 0
    v = _frac_val(x, ell) - shift
    num = x.numerator // ell ** vell(x.numerator, ell)
    den = x.denominator // ell ** vell(x.denominator, ell)
    return (ell ** v * num * pow(den, -1, mod)) % mod


# -- configurations ----------------------------------------------------------

def make_base(ell: int, p: int, prec: int | None = None) -> LocalField:
    """F = Q_ell (p | ell - 1, or ell = p = 2) or F = Q_3(zeta_3) (ell = p = 3)."""
    prec = prec or default_precision()
    if not (is_prime(ell) and is_prime(p)):
        raise UnsupportedConfiguration(f"ell = {ell} and p = {p} must both be prime")
    if ell != p and (ell - 1) % p == 0:
        digits = prec + _GUARD
        r = next(x for x in range(2, ell) if pow(x, p, ell) == 1)
        F = LocalField(ell, p, prec, d=1, m=1, zeta=(teichmuller(r, ell, digits),), name=f"Q_{ell}")
        F.set_structure([F.one()], [0], [0], e=1, g=(0, 1), uniformizer=F.from_int(ell),
                        pi_power=lambda k: LocalElement(F, k, (1,), F.prec))
    elif ell == p == 2:
        F = LocalField(2, 2, prec, d=1, m=1, zeta=(-1,), name="Q_2")
        F.set_structure([F.one()], [0], [0], e=1, g=(0, 1), uniformizer=F.from_int(2),
                        pi_power=lambda k: LocalElement(F, k, (1,), F.prec))
    elif ell == p == 3:
        F = LocalField(3, 3, prec, d=2, m=1, zeta=(0, 1), name="Q_3(zeta_3)")
        pi = F.one() - F.gen()
        F.set_structure([F.one(), pi], [0, 1], [0, -1], e=2, g=(0, 1), uniformizer=pi,
                        pi_power=lambda k: _eisenstein_power(F, pi, k))
    else:
        raise UnsupportedConfiguration(
            f"(ell, p) = ({ell}, {p}) is outside the supported matrix: need p | ell - 1 or ell = p in {{2, 3}}")
    return F


def _eisenstein_power(F: LocalField, pi: LocalElement, k: int) -> LocalElement:
    """(1 - zeta)^k in Q_3(zeta), using (1 - zeta)^2 = -3 zeta."""
    q, b = divmod(k, 2)
    z = [(1, 0), (0, 1), (-1, -1)][q % 3]
    sign = -1 if q % 2 else 1
    x = LocalElement(F, q, [sign * t for t in z], F.prec)
    return x * pi if b else x


def _monomial(K: LocalField, a_norm: LocalElement, n: int, f: LocalElement) -> LocalElement:
    """f * y^n in K = F[y]/(y^p - a_norm), reduced to a single Kummer block."""
    q, j = divmod(n, K.m)
    f = f * (a_norm ** q if q >= 0 else a_norm.inverse() ** (-q))
    c = [0] * K.n
    c[j * K.d:(j + 1) * K.d] = f.c
    return LocalElement(K, f.s, c, f.r)


def teichmuller_nonresidue(F: LocalField) -> LocalElement:
    if F.ell == F.p:
        raise UnsupportedConfiguration("every residue is a p-th power when ell = p")
    r = next(x for x in range(2, F.ell) if pow(x, (F.ell - 1) // F.p, F.ell) != 1)
    return F.from_int(teichmuller(r, F.ell, F.cap))


@dataclass
class KummerData:
    """How K = F[y]/(y^p - a_norm) was set up from the requested a."""

    kind: str
    a_norm: LocalElement
    scale: LocalElement
    kappa: int = 0


def _normalize_kummer(F: LocalField, a: LocalElement) -> KummerData:
    p, ell = F.p, F.ell
    if F.is_pth_power(a):
        raise APthPower("a is a p-th power in F, so F(a^(1/p)) = F")
    v = F.valuation(a)
    v0 = v % p
    c = F.pi_pow(-((v - v0) // p))
    a1 = a * c ** p
    if v0:
        return KummerData("ramified-y", a1, c, v0)
    if ell != p:
        return KummerData("unramified-y", a1, c)
    rf = F.resfield
    xl = F.lift(F._frob_inv(F.residue(a1)))
    c = c / xl
    a1 = a1 / xl ** p
    while True:
        diff = a1 - 1
        if diff.is_zero():
            raise APthPower("a is a p-th power in F")
        k = F.valuation(diff)
        if k < F.bound and k % p == 0:
            t = F.one() + F.lift(F._frob_inv(F.lead(diff, k))) * F.pi_pow(k // p)
            c = c / t
            a1 = a1 / t ** p
            continue
        if k < F.bound:
            return KummerData("ramified-z", a1, c, k)
        if k == F.bound:
            cbar = F.lead(diff, k)
            if any(rf.add(rf.pow(x, p), rf.mul(F._rho, x)) == cbar for x in rf.elements()):
                raise APthPower("a is a p-th power in F")
            return KummerData("unramified-x", a1, c)
        raise APthPower("a is a p-th power in F")


def _integral_ints(x: LocalElement) -> list[int]:
    if x.s < 0:
        raise BackendFailure("Kummer generator is not integral")
    return [c * x.field.ell ** x.s for c in x.c]


def make_extension(F: LocalField, a: LocalElement) -> tuple[LocalField, KummerData]:
    """K = F(a^(1/p)) with an explicit integral basis."""
    p, ell = F.p, F.ell
    data = _normalize_kummer(F, a)
    K = LocalField(ell, p, F.prec, d=F.d, m=p, a=_integral_ints(data.a_norm), zeta=F.zeta,
                   base=F, name=f"{F.name}({data.kind})")
    y = K.gen()
    f_basis = F._lifts_and_offsets()
    basis, offsets, res_index = [], [], []
    if data.kind.startswith("ramified"):
        t = y if data.kind == "ramified-y" else y - 1
        kappa = data.kappa
        elems = []
        for j in range(p):
            b = t ** j * K.embed(F.pi_pow(-((j * kappa) // p)))
            elems.append((b, (j * kappa) % p))
        for fb, foff in f_basis:
            for b, off in elems:
                o = off + p * foff
                basis.append(b * K.embed(fb))
                offsets.append(o)
                res_index.append(0 if o == 0 else -1)
        jstar = next(j for j in range(p) if (j * kappa) % p == 1)
        power = None
        if data.kind == "ramified-y":
            shift = (jstar * kappa) // p
            power = lambda k: _monomial(K, data.a_norm, jstar * k, F.pi_pow(-k * shift))
        K.set_structure(basis, offsets, res_index, e=p * F.e, g=(0, 1), uniformizer=elems[jstar][0],
                        pi_power=power)
    else:
        if data.kind == "unramified-y":
            x = y
            ubar = F.residue(data.a_norm)[0]
            g = [(-ubar) % ell] + [0] * (p - 1) + [1]
        else:
            x = (y - 1) * K.embed(F.pi_pow(-(F.e // (p - 1))))
            cbar = F.lead(data.a_norm - 1, F.bound)[0]
            rho = F._rho[0]
            g = [(-cbar) % ell, rho % ell] + [0] * (p - 2) + [1]
        for fb, foff in f_basis:
            for j in range(p):
                basis.append(x ** j * K.embed(fb))
                offsets.append(foff)
                res_index.append(j if foff == 0 else -1)
        K.set_structure(basis, offsets, res_index, e=F.e, g=g, uniformizer=K.embed(F.pi))
    return K, data


def _lifts_and_offsets(self: LocalField):
    """Integral basis of a base field as (element, offset) pairs."""
    if self.d == 1:
        return [(self.one(), 0)]
    return [(self.one(), 0), (self.pi, 1)]


LocalField._lifts_and_offsets = _lifts_and_offsets


class LocalTower(TowerContext):
    """K = F(a^(1/p)) over a supported local base F."""

    finite = True

    def __init__(self, F: LocalField, a: LocalElement):
        self.F = F
        self.p = F.p
        self.a = a
        self.K, self.data = make_extension(F, a)
        self.zeta = F.zeta_element()
        self.root_a = self.K.gen() * self.K.embed(self.data.scale.inverse())

    def one(self):
        return self.K.one()

    def F_one(self):
        return self.F.one()

    def sigma(self, x):
        return self.K.sigma(x)

    def norm(self, x):
        return self.K.norm_to_base(x)

    def to_F(self, x):
        return self.K._base_part(x)

    def embed(self, f):
        return self.K.embed(f)

    def is_pth_power(self, x) -> bool:
        return self.K.is_pth_power(x)

    def F_is_pth_power(self, f) -> bool:
        return self.F.is_pth_power(f)

    def F_pth_root(self, f):
        return self.F.pth_root(f)

    def basis_over_F(self) -> list:
        y = self.K.gen()
        return [y ** j for j in range(self.p)]

    def eq(self, x, y) -> bool:
        return (x - y).is_zero()

    def K_class_generators(self) -> list:
        return list(self.K.class_gens)

    def K_class_coords(self, x) -> list[int]:
        return self.K.class_coords(x)

    def F_class_generators(self) -> list:
        return list(self.F.class_gens)

    def F_class_coords(self, f) -> list[int]:
        return self.F.class_coords(f)

    def describe(self) -> dict:
        return {"p": self.p, "ell": self.F.ell, "F": self.F.name, "K_kind": self.data.kind,
                "e_K": self.K.e, "f_K": self.K.f, "precision": self.F.prec}


def make_K(F: LocalField, a: LocalElement) -> LocalTower:
    return LocalTower(F, a)


def unit_class_generators(field: LocalField) -> list[LocalElement]:
    return list(field.class_gens)


def with_precision_retry(fn, precision: int | None = None):
    """Run fn(prec), doubling prec on PrecisionExhausted up to MAX_PRECISION."""
    prec = precision or default_precision()
    while True:
        try:
            return fn(prec)
        except PrecisionExhausted:
            if prec * 2 > MAX_PRECISION:
                raise
            prec *= 2


def norm_group_profile(ctx: LocalTower, pres: JPresentation) -> InvariantProfile:
    """Norm-group invariants of K/F, found by running through every class of J."""
    return measure_profile(ctx, pres)
