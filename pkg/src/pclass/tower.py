"""The tower F ⊂ K = F(a^(1/p)) as seen by the module theory.

A backend supplies a `TowerContext`.  When J = K×/K×^p is finite the
context can also hand out canonical coordinates for classes, and
`build_J` turns that into a `JPresentation`: a certified basis of J
together with the matrix of sigma.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Sequence

from . import fplin
from .errors import BackendFailure, InfiniteJ, NotInSpan
from .fplin import FpMatrix, FpVector
from .gmodule import GModule, _Echelon


class TowerContext(ABC):
    """Arithmetic of F ⊂ K needed by the structure algorithms.

    `zeta` is the fixed primitive p-th root of unity in F, `a` the Kummer
    generator in F and `root_a` an element of K with root_a^p = a and
    sigma(root_a) = zeta * root_a.
    """

    p: int
    finite: bool
    zeta: Any
    a: Any
    root_a: Any

    @abstractmethod
    def one(self): ...

    @abstractmethod
    def F_one(self): ...

    @abstractmethod
    def sigma(self, x): ...

    @abstractmethod
    def norm(self, x): ...

    def trace(self, x):
        total, conj = x, x
        for _ in range(self.p - 1):
            conj = self.sigma(conj)
            total = total + conj
        return self.to_F(total)

    @abstractmethod
    def to_F(self, x):
        """View an element of K fixed by sigma as an element of F."""

    @abstractmethod
    def embed(self, f): ...

    @abstractmethod
    def is_pth_power(self, x) -> bool: ...

    @abstractmethod
    def F_is_pth_power(self, f) -> bool: ...

    @abstractmethod
    def F_pth_root(self, f): ...

    @abstractmethod
    def basis_over_F(self) -> list: ...

    @abstractmethod
    def eq(self, x, y) -> bool: ...

    def is_zero(self, x) -> bool:
        return self.eq(x, self.one() * 0)

    def describe(self) -> dict:
        return {"p": self.p}

    # Only finite backends implement the class coordinates.
    def K_class_generators(self) -> list:
        raise InfiniteJ("this backend does not present J as a finite space")

    def K_class_coords(self, x) -> list[int]:
        raise InfiniteJ("this backend does not present J as a finite space")

    def F_class_generators(self) -> list:
        raise InfiniteJ("this backend does not present F×/F×^p as a finite space")

    def F_class_coords(self, f) -> list[int]:
        raise InfiniteJ("this backend does not present F×/F×^p as a finite space")

    def check_invariants(self, samples: Sequence) -> bool:
        """norm∘sigma = norm, sigma^p = id and the normalization of root_a, on samples."""
        p = self.p
        if not self.eq(self.sigma(self.root_a), self.root_a * self.embed(self.zeta)):
            return False
        if not self.eq(self.root_a ** p, self.embed(self.a)):
            return False
        for x in samples:
            if not self.eq(self.embed(self.norm(self.sigma(x))), self.embed(self.norm(x))):
                return False
            y = x
            for _ in range(p):
                y = self.sigma(y)
            if not self.eq(y, x):
                return False
        return True


@dataclass(frozen=True)
class ClassVector:
    coords: FpVector
    representative: Any


@dataclass(frozen=True)
class JPresentation:
    basis_reps: tuple
    module: GModule
    epsilon_basis: tuple[int, ...]
    a_class: FpVector
    zeta_class: FpVector
    change_of_basis: FpMatrix
    F_dim: int

    @property
    def p(self) -> int:
        return self.module.p

    @property
    def dim(self) -> int:
        return self.module.dim

    def lift(self, ctx: TowerContext, coords: FpVector):
        x = ctx.one()
        for rep, e in zip(self.basis_reps, coords):
            if e:
                x = x * rep ** e
        return x


def _fp(ctx: TowerContext, coords) -> FpVector:
    return FpVector(ctx.p, list(coords))


def build_J(ctx: TowerContext, certify: bool = True) -> JPresentation:
    if not ctx.finite:
        raise InfiniteJ("J is infinite for this backend")
    p = ctx.p
    kgens = ctx.K_class_generators()
    n = len(kgens)
    fgens = ctx.F_class_generators()
    candidates = [ctx.embed(g) for g in fgens] + list(kgens)
    ech = _Echelon(p, n)
    reps, cols, eps = [], [], []
    for i, c in enumerate(candidates):
        v = _fp(ctx, ctx.K_class_coords(c))
        if ech.add(v):
            if i < len(fgens):
                eps.append(len(reps))
            reps.append(c)
            cols.append(v)
        if len(reps) == n:
            break
    if len(reps) != n:
        raise BackendFailure("class generators do not span J")
    bmat = FpMatrix.from_columns(p, cols)
    binv = fplin.inverse(bmat)
    if certify:
        certify_basis(ctx, reps)
    sigma_cols = [binv @ _fp(ctx, ctx.K_class_coords(ctx.sigma(b))) for b in reps]
    module = GModule(p, FpMatrix.from_columns(p, sigma_cols))
    a_class = _fp(ctx, ctx.F_class_coords(ctx.a))
    zeta_class = binv @ _fp(ctx, ctx.K_class_coords(ctx.embed(ctx.zeta)))
    return JPresentation(tuple(reps), module, tuple(eps), a_class, zeta_class, binv, len(fgens))


def _all_products(ctx: TowerContext, reps: Sequence) -> list:
    """prod reps[i]^e_i for every e in [0, p)^n, in odometer order (last index fastest).

    Each product is built from a shorter one by a single multiplication, so
    the number of multiplications behind any entry is at most n * (p - 1).
    """
    out = [ctx.one()]
    for r in reps:
        powers = [ctx.one()]
        for _ in range(ctx.p - 1):
            powers.append(powers[-1] * r)
        out = [x * pw for x in out for pw in powers]
    return out


def certify_basis(ctx: TowerContext, reps: Sequence) -> None:
    """No nontrivial product of the reps with exponents in [0, p) is a p-th power.

    The reps are split in two halves; all products over each half are
    tabulated and every exponent vector is tested as one product of a left
    and a right entry.
    """
    p, n = ctx.p, len(reps)
    h = n // 2
    left = _all_products(ctx, reps[:h])
    right = _all_products(ctx, reps[h:])
    for i, x in enumerate(left):
        for j, y in enumerate(right):
            if i == 0 and j == 0:
                continue
            if ctx.is_pth_power(x * y):
                digits = _odometer_digits(i, p, h) + _odometer_digits(j, p, n - h)
                raise BackendFailure(f"class basis is dependent: exponents {digits} give a p-th power")


def _odometer_digits(k: int, p: int, n: int) -> list[int]:
    out = []
    for _ in range(n):
        k, d = divmod(k, p)
        out.append(d)
    return out[::-1]


def reduce(ctx: TowerContext, gamma, pres: JPresentation) -> ClassVector:
    coords = pres.change_of_basis @ _fp(ctx, ctx.K_class_coords(gamma))
    if len(coords) != pres.dim:
        raise NotInSpan("class coordinates do not match the presentation")
    return ClassVector(coords, gamma)


def norm_class_map(ctx: TowerContext, pres: JPresentation, check: bool = True) -> FpMatrix:
    """Matrix of J -> F×/F×^p, [γ] ↦ [N γ], in the chosen bases."""
    cols = [_fp(ctx, ctx.F_class_coords(ctx.norm(b))) for b in pres.basis_reps]
    if check:
        k = ctx.root_a + ctx.one()
        for b, col in zip(pres.basis_reps, cols):
            shifted = _fp(ctx, ctx.F_class_coords(ctx.norm(b * k ** ctx.p)))
            if shifted != col:
                raise BackendFailure("norm map is not constant on classes")
    return FpMatrix.from_columns(ctx.p, cols, rows=pres.F_dim)


def epsilon_image(ctx: TowerContext, pres: JPresentation) -> list[FpVector]:
    vecs = [reduce(ctx, ctx.embed(g), pres).coords for g in ctx.F_class_generators()]
    nonzero = [v for v in vecs if not v.is_zero()]
    if not nonzero:
        return []
    return fplin.image_basis(FpMatrix.from_columns(ctx.p, nonzero))


def all_class_vectors(p: int, n: int) -> list[FpVector]:
    return [FpVector(p, row) for row in fplin.all_vectors(p, n)]
