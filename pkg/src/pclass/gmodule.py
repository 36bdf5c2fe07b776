"""Finite F_p[G]-modules for a cyclic group G = <sigma> of prime order p.

A module is a pair (p, sigma) with sigma a dim x dim matrix over F_p of order
dividing p.  Everything here works with the nilpotent operator T = sigma - I,
whose Jordan blocks are exactly the indecomposable summands.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from . import fplin
from .errors import DimensionMismatch, InvalidModule, ZeroVector
from .fplin import FpMatrix, FpVector


@dataclass(frozen=True)
class GModule:
    p: int
    sigma: FpMatrix

    def __post_init__(self):
        s = self.sigma
        if s.p != self.p:
            raise InvalidModule(f"sigma is over F_{s.p}, module over F_{self.p}")
        if s.rows != s.cols:
            raise InvalidModule(f"sigma must be square, got {s.shape}")
        if fplin.mat_pow(s, self.p) != FpMatrix.identity(self.p, s.rows):
            raise InvalidModule("sigma^p is not the identity")

    @property
    def dim(self) -> int:
        return self.sigma.rows

    @property
    def nilpotent(self) -> FpMatrix:
        return self.sigma - FpMatrix.identity(self.p, self.dim)

    def apply_t(self, v: FpVector, times: int = 1) -> FpVector:
        t = self.nilpotent
        for _ in range(times):
            v = t @ v
        return v


@dataclass(frozen=True)
class CyclicSummand:
    """The span of g, Tg, ..., T^(length-1) g for T = sigma - I."""

    generator: FpVector
    length: int
    basis: tuple[FpVector, ...]

    def to_json(self) -> dict:
        return {"generator": list(self.generator.coords), "length": self.length}


@dataclass(frozen=True)
class Decomposition:
    parts: tuple[CyclicSummand, ...]

    def lengths(self) -> list[int]:
        return sorted((c.length for c in self.parts), reverse=True)

    def multiplicities(self, p: int) -> MultiplicityVector:
        counts = {i: 0 for i in range(1, p + 1)}
        for c in self.parts:
            counts[c.length] += 1
        return MultiplicityVector(p, counts)


@dataclass(frozen=True)
class MultiplicityVector:
    """How many indecomposable summands of each length 1..p a module has."""

    p: int
    m: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self):
        full = {i: int(self.m.get(i, 0)) for i in range(1, self.p + 1)}
        extra = set(self.m) - set(full)
        if extra:
            raise ValueError(f"lengths {sorted(extra)} exceed p = {self.p}")
        if any(v < 0 for v in full.values()):
            raise ValueError(f"negative multiplicity in {full}")
        object.__setattr__(self, "m", full)

    def __getitem__(self, i: int) -> int:
        return self.m[i]

    @property
    def dim(self) -> int:
        return sum(i * c for i, c in self.m.items())

    def lengths(self) -> list[int]:
        return [i for i in range(self.p, 0, -1) for _ in range(self.m[i])]

    def to_json(self) -> dict[str, int]:
        return {str(i): c for i, c in self.m.items()}

    def __eq__(self, other) -> bool:
        if not isinstance(other, MultiplicityVector):
            return NotImplemented
        return self.p == other.p and dict(self.m) == dict(other.m)

    def __hash__(self) -> int:
        return hash((self.p, tuple(sorted(self.m.items()))))

    def __repr__(self) -> str:
        body = ", ".join(f"{i}:{c}" for i, c in self.m.items())
        return f"MultiplicityVector(p={self.p}, {{{body}}})"


def _t_power_ranks(M: GModule) -> list[int]:
    """r_j = rank((sigma - I)^j) for j = 0..p+1."""
    t = M.nilpotent
    ranks = [M.dim]
    power = FpMatrix.identity(M.p, M.dim)
    for _ in range(M.p + 1):
        power = power @ t
        ranks.append(fplin.rank(power))
    return ranks


def socle_series(M: GModule) -> list[int]:
    """[dim J_1, ..., dim J_p] where J_i = ker (sigma - I)^i."""
    ranks = _t_power_ranks(M)
    return [M.dim - ranks[i] for i in range(1, M.p + 1)]


def norm_operator(M: GModule) -> FpMatrix:
    """1 + sigma + ... + sigma^(p-1)."""
    total = FpMatrix.zeros(M.p, M.dim, M.dim)
    power = FpMatrix.identity(M.p, M.dim)
    for _ in range(M.p):
        total = total + power
        power = power @ M.sigma
    return total


def jordan_multiplicities(M: GModule) -> MultiplicityVector:
    """Block counts from second differences of the ranks of powers of sigma - I."""
    r = _t_power_ranks(M)
    return MultiplicityVector(M.p, {i: r[i - 1] - 2 * r[i] + r[i + 1] for i in range(1, M.p + 1)})


def cyclic_submodule(M: GModule, v: FpVector) -> CyclicSummand:
    if len(v) != M.dim:
        raise DimensionMismatch(f"vector of length {len(v)} in a module of dimension {M.dim}")
    if v.is_zero():
        raise ZeroVector("the zero vector generates the zero submodule")
    basis = []
    w = v
    while not w.is_zero():
        basis.append(w)
        w = M.apply_t(w)
    return CyclicSummand(v, len(basis), tuple(basis))


class _Echelon:
    """Incremental span membership over F_p, keeping an RREF of the rows seen so far."""

    def __init__(self, p: int, n: int):
        self.p, self.n = p, n
        self.rows: list[np.ndarray] = []
        self.pivots: list[int] = []

    def _reduce(self, v: np.ndarray) -> np.ndarray:
        v = v.copy()
        for row, c in zip(self.rows, self.pivots):
            if v[c]:
                v = (v - v[c] * row) % self.p
        return v

    def add(self, vec: FpVector) -> bool:
        """Insert vec; return False if it was already in the span."""
        v = self._reduce(vec.a)
        nz = np.nonzero(v)[0]
        if nz.size == 0:
            return False
        c = int(nz[0])
        v = (v * pow(int(v[c]), -1, self.p)) % self.p
        for i, row in enumerate(self.rows):
            if row[c]:
                self.rows[i] = (row - row[c] * v) % self.p
        self.rows.append(v)
        self.pivots.append(c)
        return True

    def contains(self, vec: FpVector) -> bool:
        return not self._reduce(vec.a).any()

    @property
    def rank(self) -> int:
        return len(self.rows)


def decompose_jordan(M: GModule) -> Decomposition:
    """A Jordan basis of sigma - I, chains chosen from the longest length down.

    Chain tops of length L are taken greedily from the kernel basis of T^L as
    a complement of ker T^(L-1) plus the length-L segments of longer chains.
    """
    p, n = M.p, M.dim
    t = M.nilpotent
    kernels = [[]] + [fplin.kernel_basis(fplin.mat_pow(t, L)) for L in range(1, p + 1)]
    tops: list[tuple[FpVector, int]] = []
    for L in range(p, 0, -1):
        ech = _Echelon(p, n)
        for v in kernels[L - 1]:
            ech.add(v)
        for g, length in tops:
            ech.add(M.apply_t(g, length - L))
        for v in kernels[L]:
            if ech.add(v):
                tops.append((v, L))
    parts = []
    for g, L in tops:
        chain = [g]
        for _ in range(L - 1):
            chain.append(t @ chain[-1])
        parts.append(CyclicSummand(g, L, tuple(chain)))
    return Decomposition(tuple(parts))


def verify_direct_sum(M: GModule, parts) -> bool:
    """True iff the parts are well-formed cyclic summands whose bases form a basis of M."""
    parts = list(parts)
    if not parts:
        return M.dim == 0
    ech = _Echelon(M.p, M.dim)
    total = 0
    for part in parts:
        if part.length < 1 or len(part.basis) != part.length:
            return False
        if any(len(b) != M.dim or b.p != M.p for b in part.basis):
            return False
        local = _Echelon(M.p, M.dim)
        for b in part.basis:
            if not local.add(b):
                return False
        for b in part.basis:
            if not local.contains(M.sigma @ b):
                return False
        for b in part.basis:
            if not ech.add(b):
                return False
        total += part.length
    return total == M.dim and ech.rank == M.dim


def fixed_submodule(M: GModule) -> list[FpVector]:
    return fplin.kernel_basis(M.nilpotent)


def jordan_block(p: int, length: int) -> np.ndarray:
    """Unipotent block I + N with ones on the subdiagonal (sigma e_i = e_i + e_(i+1))."""
    b = np.eye(length, dtype=np.int64)
    for i in range(length - 1):
        b[i + 1, i] = 1
    return b


def normal_form(p: int, profile: MultiplicityVector) -> FpMatrix:
    blocks = [jordan_block(p, L) for L in profile.lengths()]
    n = profile.dim
    out = np.zeros((n, n), dtype=np.int64)
    k = 0
    for b in blocks:
        L = b.shape[0]
        out[k:k + L, k:k + L] = b
        k += L
    return FpMatrix(p, out)


def random_invertible(p: int, n: int, rng: np.random.Generator) -> tuple[FpMatrix, FpMatrix]:
    while True:
        s = FpMatrix(p, rng.integers(0, p, size=(n, n)))
        if fplin.rank(s) == n:
            return s, fplin.inverse(s)


def random_module(p: int, profile: MultiplicityVector | Mapping[int, int], seed: int) -> GModule:
    if not isinstance(profile, MultiplicityVector):
        profile = MultiplicityVector(p, profile)
    rng = np.random.default_rng(seed)
    nf = normal_form(p, profile)
    if profile.dim == 0:
        return GModule(p, nf)
    s, s_inv = random_invertible(p, profile.dim, rng)
    return GModule(p, s @ nf @ s_inv)


def random_profile(p: int, dim: int, rng: np.random.Generator) -> MultiplicityVector:
    """A uniformly chosen sequence of block lengths filling exactly `dim`."""
    counts = {i: 0 for i in range(1, p + 1)}
    left = dim
    while left:
        L = int(rng.integers(1, min(p, left) + 1))
        counts[L] += 1
        left -= L
    return MultiplicityVector(p, counts)
