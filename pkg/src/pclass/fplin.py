"""Dense exact linear algebra over the prime field F_p.

Matrices and vectors are immutable wrappers around int64 numpy arrays whose
entries are kept reduced into [0, p).  Elimination always pivots on the first
nonzero entry in column order, so kernel and complement bases are
reproducible across runs.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatch


def _as_array(p: int, data, ndim: int) -> np.ndarray:
    arr = np.array(data, dtype=np.int64)
    if ndim == 2 and arr.ndim == 1 and arr.size == 0:
        arr = arr.reshape(0, 0)
    if arr.ndim != ndim:
        raise DimensionMismatch(f"expected a {ndim}-dimensional array, got shape {arr.shape}")
    arr = np.mod(arr, p)
    arr.setflags(write=False)
    return arr


class FpVector:
    __slots__ = ("p", "a")

    def __init__(self, p: int, coords: Iterable[int] | np.ndarray):
        self.p = int(p)
        self.a = _as_array(self.p, list(coords) if not isinstance(coords, np.ndarray) else coords, 1)

    @classmethod
    def zero(cls, p: int, n: int) -> FpVector:
        return cls(p, np.zeros(n, dtype=np.int64))

    @classmethod
    def unit(cls, p: int, n: int, i: int) -> FpVector:
        v = np.zeros(n, dtype=np.int64)
        v[i] = 1
        return cls(p, v)

    def __len__(self) -> int:
        return int(self.a.shape[0])

    def __iter__(self):
        return (int(x) for x in self.a)

    def __getitem__(self, i: int) -> int:
        return int(self.a[i])

    @property
    def coords(self) -> tuple[int, ...]:
        return tuple(int(x) for x in self.a)

    def is_zero(self) -> bool:
        return not self.a.any()

    def _check(self, other: FpVector) -> None:
        if other.p != self.p or len(other) != len(self):
            raise DimensionMismatch("vectors over different fields or of different lengths")

    def __add__(self, other: FpVector) -> FpVector:
        self._check(other)
        return FpVector(self.p, self.a + other.a)

    def __sub__(self, other: FpVector) -> FpVector:
        self._check(other)
        return FpVector(self.p, self.a - other.a)

    def __neg__(self) -> FpVector:
        return FpVector(self.p, -self.a)

    def __mul__(self, c: int) -> FpVector:
        return FpVector(self.p, self.a * (int(c) % self.p))

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, FpVector):
            return NotImplemented
        return self.p == other.p and self.a.shape == other.a.shape and bool(np.array_equal(self.a, other.a))

    def __hash__(self) -> int:
        return hash((self.p, self.coords))

    def __repr__(self) -> str:
        return f"FpVector(p={self.p}, {list(self.coords)})"


class FpMatrix:
    __slots__ = ("p", "a")

    def __init__(self, p: int, entries: Sequence[Sequence[int]] | np.ndarray):
        self.p = int(p)
        self.a = _as_array(self.p, entries, 2)

    @classmethod
    def identity(cls, p: int, n: int) -> FpMatrix:
        return cls(p, np.eye(n, dtype=np.int64))

    @classmethod
    def zeros(cls, p: int, rows: int, cols: int) -> FpMatrix:
        return cls(p, np.zeros((rows, cols), dtype=np.int64))

    @classmethod
    def from_columns(cls, p: int, columns: Sequence[FpVector], rows: int | None = None) -> FpMatrix:
        if not columns:
            return cls.zeros(p, rows or 0, 0)
        return cls(p, np.stack([c.a for c in columns], axis=1))

    @property
    def rows(self) -> int:
        return int(self.a.shape[0])

    @property
    def cols(self) -> int:
        return int(self.a.shape[1])

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def column(self, j: int) -> FpVector:
        return FpVector(self.p, self.a[:, j])

    def columns(self) -> list[FpVector]:
        return [self.column(j) for j in range(self.cols)]

    def tolist(self) -> list[list[int]]:
        return [[int(x) for x in row] for row in self.a]

    def __matmul__(self, other):
        if isinstance(other, FpVector):
            if other.p != self.p or len(other) != self.cols:
                raise DimensionMismatch(f"cannot apply {self.shape} matrix to vector of length {len(other)}")
            return FpVector(self.p, self.a @ other.a)
        return mat_mul(self, other)

    def __add__(self, other: FpMatrix) -> FpMatrix:
        return mat_add(self, other)

    def __sub__(self, other: FpMatrix) -> FpMatrix:
        _same_shape(self, other)
        return FpMatrix(self.p, self.a - other.a)

    def __neg__(self) -> FpMatrix:
        return FpMatrix(self.p, -self.a)

    def __eq__(self, other) -> bool:
        if not isinstance(other, FpMatrix):
            return NotImplemented
        return self.p == other.p and self.a.shape == other.a.shape and bool(np.array_equal(self.a, other.a))

    def __hash__(self) -> int:
        return hash((self.p, self.a.shape, self.a.tobytes()))

    def is_zero(self) -> bool:
        return not self.a.any()

    def transpose(self) -> FpMatrix:
        return FpMatrix(self.p, self.a.T)

    def __repr__(self) -> str:
        return f"FpMatrix(p={self.p}, {self.tolist()})"


def _same_shape(m: FpMatrix, n: FpMatrix) -> None:
    if m.p != n.p or m.shape != n.shape:
        raise DimensionMismatch(f"shape mismatch: {m.shape} vs {n.shape}")


def mat_mul(m: FpMatrix, n: FpMatrix) -> FpMatrix:
    if m.p != n.p or m.cols != n.rows:
        raise DimensionMismatch(f"cannot multiply {m.shape} by {n.shape}")
    return FpMatrix(m.p, np.mod(m.a @ n.a, m.p))


def mat_add(m: FpMatrix, n: FpMatrix) -> FpMatrix:
    _same_shape(m, n)
    return FpMatrix(m.p, m.a + n.a)


def mat_pow(m: FpMatrix, e: int) -> FpMatrix:
    if m.rows != m.cols:
        raise DimensionMismatch("mat_pow needs a square matrix")
    if e < 0:
        raise ValueError("negative exponent")
    result = FpMatrix.identity(m.p, m.rows)
    base = m
    while e:
        if e & 1:
            result = mat_mul(result, base)
        e >>= 1
        if e:
            base = mat_mul(base, base)
    return result


def rref(m: FpMatrix) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form and the pivot columns."""
    p = m.p
    a = m.a.copy()
    rows, cols = a.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(a[r:, c])[0]
        if nz.size == 0:
            continue
        k = r + int(nz[0])
        if k != r:
            a[[r, k]] = a[[k, r]]
        a[r] = (a[r] * pow(int(a[r, c]), -1, p)) % p
        col = a[:, c].copy()
        col[r] = 0
        if col.any():
            a = (a - np.outer(col, a[r])) % p
        pivots.append(c)
        r += 1
    return a, pivots


def rank(m: FpMatrix) -> int:
    if m.rows == 0 or m.cols == 0:
        return 0
    return len(rref(m)[1])


def kernel_basis(m: FpMatrix) -> list[FpVector]:
    """Basis of {x : m x = 0}, one vector per free column, in column order."""
    p, cols = m.p, m.cols
    if m.rows == 0:
        return [FpVector.unit(p, cols, j) for j in range(cols)]
    a, pivots = rref(m)
    free = [j for j in range(cols) if j not in pivots]
    basis = []
    for f in free:
        v = np.zeros(cols, dtype=np.int64)
        v[f] = 1
        for i, pc in enumerate(pivots):
            v[pc] = -a[i, f]
        basis.append(FpVector(p, v))
    return basis


def image_basis(m: FpMatrix) -> list[FpVector]:
    """The pivot columns of m, which form a basis of its column space."""
    if m.rows == 0 or m.cols == 0:
        return []
    _, pivots = rref(m)
    return [m.column(j) for j in pivots]


def solve(m: FpMatrix, b: FpVector) -> FpVector | None:
    """Some x with m x = b, or None when b is outside the column space."""
    if b.p != m.p or len(b) != m.rows:
        raise DimensionMismatch(f"right-hand side of length {len(b)} for a {m.shape} matrix")
    p = m.p
    if m.cols == 0:
        return FpVector.zero(p, 0) if b.is_zero() else None
    aug = FpMatrix(p, np.concatenate([m.a, b.a.reshape(-1, 1)], axis=1))
    a, pivots = rref(aug)
    if m.cols in pivots:
        return None
    x = np.zeros(m.cols, dtype=np.int64)
    for i, pc in enumerate(pivots):
        x[pc] = a[i, m.cols]
    return FpVector(p, x)


def inverse(m: FpMatrix) -> FpMatrix:
    if m.rows != m.cols:
        raise DimensionMismatch("only square matrices have inverses")
    n = m.rows
    aug = FpMatrix(m.p, np.concatenate([m.a, np.eye(n, dtype=np.int64)], axis=1))
    a, pivots = rref(aug)
    if pivots[:n] != list(range(n)):
        raise ValueError("matrix is singular")
    return FpMatrix(m.p, a[:, n:])


def span_rank(vectors: Sequence[FpVector], p: int, n: int) -> int:
    if not vectors:
        return 0
    return rank(FpMatrix(p, np.stack([v.a for v in vectors])))


def in_span(v: FpVector, vectors: Sequence[FpVector]) -> bool:
    if v.is_zero():
        return True
    if not vectors:
        return False
    return span_rank(list(vectors) + [v], v.p, len(v)) == span_rank(vectors, v.p, len(v))


def complement_in(ambient: Sequence[FpVector], sub: Sequence[FpVector]) -> list[FpVector]:
    """Members of `ambient`, in order, that extend a basis of span(sub) greedily."""
    chosen: list[FpVector] = []
    current = [v for v in sub if not v.is_zero()]
    for v in ambient:
        if not in_span(v, current):
            chosen.append(v)
            current.append(v)
    return chosen


def intersect(u: Sequence[FpVector], w: Sequence[FpVector], p: int, n: int) -> list[FpVector]:
    """Basis of span(u) ∩ span(w)."""
    if not u or not w:
        return []
    stacked = FpMatrix(p, np.concatenate([np.stack([x.a for x in u], axis=1),
                                          -np.stack([x.a for x in w], axis=1)], axis=1))
    umat = FpMatrix.from_columns(p, list(u))
    out: list[FpVector] = []
    for k in kernel_basis(stacked):
        v = umat @ FpVector(p, k.a[: len(u)])
        if not in_span(v, out):
            out.append(v)
    return out


def all_vectors(p: int, n: int) -> np.ndarray:
    """Every vector of F_p^n as rows of an (p^n, n) array, in odometer order."""
    if n == 0:
        return np.zeros((1, 0), dtype=np.int64)
    grids = np.indices((p,) * n).reshape(n, -1).T
    return grids.astype(np.int64)
