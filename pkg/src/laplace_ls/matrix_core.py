"""Dense storage, normal-equation formation, residuals and direct oracles.

Inner products accumulate sequentially in index order.  Digit-level
replication depends on a fixed, simple summation order, so no pairwise or
BLAS-backed reductions are used on the library path.  ``invert_spd`` and
``jacobi_eigenvalues`` are independent oracles: they never call into the
reverse factorizations they are used to check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError, SingularMatrixError

# Laplace's column letters for the six-element problem.
LAPLACE_LETTERS = ("p", "q", "r", "t", "γ", "λ")


def default_labels(n: int) -> tuple[str, ...]:
    """Column names ``p, q, r, t, γ, λ`` followed by ``c7, c8, ...``."""
    return tuple(LAPLACE_LETTERS[j] if j < len(LAPLACE_LETTERS) else f"c{j + 1}" for j in range(n))


def as_vector(values: Iterable[float] | np.ndarray, name: str = "vector") -> np.ndarray:
    """Return a read-only 1-D float64 copy of ``values``; all entries must be finite."""
    v = np.array(values, dtype=np.float64)
    if v.ndim != 1:
        raise DimensionError(f"{name} must be one-dimensional, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} has non-finite entries")
    v.setflags(write=False)
    return v


def _dot(x: np.ndarray, y: np.ndarray, compensated: bool = False) -> float:
    if compensated:
        return math.fsum(float(a) * float(b) for a, b in zip(x, y))
    acc = 0.0
    for a, b in zip(x.tolist(), y.tolist()):
        acc += a * b
    return acc


def packed_index(i: int, j: int) -> int:
    """Offset of entry (i, j), i >= j, in row-major packed lower storage."""
    if j > i:
        i, j = j, i
    return i * (i + 1) // 2 + j


@dataclass(frozen=True)
class DenseMatrix:
    """An s-by-n regression matrix with named columns (s >= n >= 1)."""

    data: np.ndarray
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        a = np.array(self.data, dtype=np.float64)
        if a.ndim != 2:
            raise DimensionError(f"matrix must be two-dimensional, got shape {a.shape}")
        rows, cols = a.shape
        if cols < 1 or rows < cols:
            raise DimensionError(f"need rows >= cols >= 1, got {rows}x{cols}")
        if not np.all(np.isfinite(a)):
            raise ValueError("matrix has non-finite entries")
        a.setflags(write=False)
        labels = tuple(self.labels) if self.labels else default_labels(cols)
        if len(labels) != cols:
            raise DimensionError(f"{len(labels)} labels for {cols} columns")
        object.__setattr__(self, "data", a)
        object.__setattr__(self, "labels", labels)

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    def column(self, j: int) -> np.ndarray:
        return self.data[:, j]


@dataclass(frozen=True)
class NormalSystem:
    """Packed symmetric normal matrix AᵀA, right-hand side Aᵀb and metadata.

    ``lower`` holds the lower triangle row by row: row ``i`` contributes
    entries ``(i, 0) .. (i, i)``.  ``s`` is the observation count and ``rss``
    the residual sum of squares of the least-squares fit, both optional until
    a statistical quantity needs them.
    """

    lower: np.ndarray
    rhs: np.ndarray
    s: int | None = None
    rss: float | None = None
    labels: tuple[str, ...] = field(default=())

    def __post_init__(self):
        rhs = as_vector(self.rhs, "rhs")
        n = rhs.shape[0]
        if n < 1:
            raise DimensionError("normal system needs at least one variable")
        lower = as_vector(self.lower, "lower")
        if lower.shape[0] != n * (n + 1) // 2:
            raise DimensionError(
                f"packed lower triangle has {lower.shape[0]} entries, expected {n * (n + 1) // 2}"
            )
        for i in range(n):
            if not lower[packed_index(i, i)] > 0.0:
                raise ValueError(f"diagonal entry {i} is not strictly positive")
        if self.s is not None and int(self.s) < 1:
            raise ValueError("observation count s must be positive")
        if self.rss is not None and not (math.isfinite(self.rss) and self.rss >= 0.0):
            raise ValueError("rss must be a finite nonnegative number")
        labels = tuple(self.labels) if self.labels else tuple(f"x{i + 1}" for i in range(n))
        if len(labels) != n:
            raise DimensionError(f"{len(labels)} labels for {n} variables")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "rhs", rhs)
        object.__setattr__(self, "s", None if self.s is None else int(self.s))
        object.__setattr__(self, "rss", None if self.rss is None else float(self.rss))
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.rhs.shape[0]

    def entry(self, i: int, j: int) -> float:
        return float(self.lower[packed_index(i, j)])

    def matrix(self) -> np.ndarray:
        """Full symmetric n-by-n array."""
        n = self.n
        out = np.empty((n, n))
        for i in range(n):
            for j in range(i + 1):
                out[i, j] = out[j, i] = self.lower[packed_index(i, j)]
        return out

    def lower_rows(self) -> list[list[float]]:
        return [[self.entry(i, j) for j in range(i + 1)] for i in range(self.n)]

    @classmethod
    def from_rows(
        cls,
        rows: Sequence[Sequence[float]],
        rhs: Sequence[float],
        s: int | None = None,
        rss: float | None = None,
        labels: Sequence[str] = (),
    ) -> NormalSystem:
        """Build from lower-triangle rows (row i has i + 1 entries)."""
        for i, row in enumerate(rows):
            if len(row) != i + 1:
                raise DimensionError(f"row {i} has {len(row)} entries, expected {i + 1}")
        if len(rows) != len(rhs):
            raise DimensionError(f"{len(rows)} rows but {len(rhs)} right-hand side entries")
        packed = [float(v) for row in rows for v in row]
        return cls(np.array(packed), np.array(rhs, dtype=float), s, rss, tuple(labels))

    @classmethod
    def from_matrix(
        cls,
        matrix: np.ndarray | Sequence[Sequence[float]],
        rhs: Sequence[float],
        s: int | None = None,
        rss: float | None = None,
        labels: Sequence[str] = (),
    ) -> NormalSystem:
        """Build from a full symmetric matrix; the upper triangle must mirror the lower."""
        m = np.asarray(matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"normal matrix must be square, got shape {m.shape}")
        if not np.array_equal(m, m.T):
            scale = np.max(np.abs(m)) or 1.0
            if np.max(np.abs(m - m.T)) > 1e-12 * scale:
                raise ValueError("normal matrix is not symmetric")
        rows = [m[i, : i + 1].tolist() for i in range(m.shape[0])]
        return cls.from_rows(rows, rhs, s, rss, labels)

    def with_rss(self, rss: float, s: int | None = None) -> NormalSystem:
        return NormalSystem(self.lower, self.rhs, self.s if s is None else s, rss, self.labels)

    def permuted(self, order: Sequence[int]) -> NormalSystem:
        """Symmetric row/column permutation: new variable k is old variable ``order[k]``."""
        order = list(order)
        if sorted(order) != list(range(self.n)):
            raise ValueError(f"{order} is not a permutation of range({self.n})")
        rows = [[self.entry(order[i], order[j]) for j in range(i + 1)] for i in range(self.n)]
        rhs = [float(self.rhs[k]) for k in order]
        labels = [self.labels[k] for k in order]
        return NormalSystem.from_rows(rows, rhs, self.s, self.rss, labels)


def gram(A: DenseMatrix, b: Sequence[float] | np.ndarray, compensated: bool = False) -> NormalSystem:
    """Form the normal equations AᵀA x = Aᵀb.

    Each lower entry is one sequential sum over the observations; with
    ``compensated=True`` the sums are exact-rounded (``math.fsum``) instead.
    """
    b = as_vector(b, "b")
    if b.shape[0] != A.rows:
        raise DimensionError(f"b has {b.shape[0]} entries, A has {A.rows} rows")
    cols = [A.column(j) for j in range(A.cols)]
    packed = [_dot(cols[i], cols[j], compensated) for i in range(A.cols) for j in range(i + 1)]
    rhs = [_dot(cols[i], b, compensated) for i in range(A.cols)]
    return NormalSystem(np.array(packed), np.array(rhs), s=A.rows, labels=A.labels)


def matvec(A: DenseMatrix, x: np.ndarray) -> np.ndarray:
    return np.array([_dot(A.data[k], x) for k in range(A.rows)])


def residual(A: DenseMatrix, x: Sequence[float] | np.ndarray, b: Sequence[float] | np.ndarray) -> tuple[np.ndarray, float]:
    """Return ``e' = A x - b`` and its squared norm."""
    x = as_vector(x, "x")
    b = as_vector(b, "b")
    if x.shape[0] != A.cols:
        raise DimensionError(f"x has {x.shape[0]} entries, A has {A.cols} columns")
    if b.shape[0] != A.rows:
        raise DimensionError(f"b has {b.shape[0]} entries, A has {A.rows} rows")
    e = matvec(A, x) - b
    return e, _dot(e, e)


def invert_spd(S: NormalSystem | np.ndarray) -> np.ndarray:
    """Oracle inverse of a symmetric positive definite matrix.

    Equilibrates with D = diag(1/sqrt(a_ii)), runs Gauss-Jordan on D·S·D in
    natural (first-to-last) pivot order, and undoes the scaling.  Intended for
    tests and cross-checks only.
    """
    m = S.matrix() if isinstance(S, NormalSystem) else np.array(S, dtype=float)
    n = m.shape[0]
    if m.shape != (n, n):
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")
    diag = np.diag(m)
    if np.any(diag <= 0.0):
        raise SingularMatrixError("matrix has a non-positive diagonal entry")
    d = 1.0 / np.sqrt(diag)
    work = np.hstack([m * d[:, None] * d[None, :], np.eye(n)])
    for p in range(n):
        pivot = work[p, p]
        if not pivot > 0.0:
            raise SingularMatrixError(f"non-positive pivot {pivot!r} at position {p}")
        work[p] /= pivot
        for r in range(n):
            if r != p and work[r, p] != 0.0:
                work[r] -= work[r, p] * work[p]
    inv = work[:, n:] * d[:, None] * d[None, :]
    return 0.5 * (inv + inv.T)


def jacobi_eigenvalues(matrix: np.ndarray, tol: float = 1e-15, max_sweeps: int = 100) -> np.ndarray:
    """Eigenvalues of a small symmetric matrix by cyclic Jacobi rotations, ascending."""
    a = np.array(matrix, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n):
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    a = 0.5 * (a + a.T)
    for _ in range(max_sweeps):
        off = math.sqrt(sum(a[i, j] ** 2 for i in range(n) for j in range(n) if i != j))
        if off <= tol * np.linalg.norm(np.diag(a)):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if a[p, q] == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * a[p, q])
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                rot = np.eye(n)
                rot[p, p] = rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                a = rot.T @ a @ rot
                a[p, q] = a[q, p] = 0.0
    return np.sort(np.diag(a))


def condition_number_2(matrix: np.ndarray) -> float:
    """2-norm condition number of an SPD matrix from its Jacobi eigenvalues."""
    ev = jacobi_eigenvalues(matrix)
    if ev[0] <= 0.0:
        raise SingularMatrixError("matrix is not positive definite")
    return float(ev[-1] / ev[0])
