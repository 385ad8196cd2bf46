"""Reverse square-root-free Cholesky on the normal equations.

For k = n..2 the trailing variable is eliminated by a symmetric rank-1
update of the leading (k-1)-by-(k-1) lower triangle, and the right-hand side
is reduced in the same pass (the backward solve done on the fly)::

    lower(i, j) <- lower(i, j) - lower(i, k) * lower(j, k) / lower(k, k)
    rhs(i)      <- rhs(i)      - lower(i, k) * rhs(k)      / lower(k, k)

The result satisfies ``AᵀA = (D⁻¹ M)ᵀ M`` with ``D = diag(M)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable, Sequence

import numpy as np

from .errors import NotPositiveDefiniteError, UnsolvedVariableError
from .matrix_core import NormalSystem

SNAPSHOT_LIMIT = 64


@dataclass(frozen=True)
class Snapshot:
    """The reduced system with ``size`` variables left (symmetric matrix + rhs)."""

    size: int
    matrix: np.ndarray
    rhs: np.ndarray


@dataclass(frozen=True)
class ReverseCholesky:
    M: np.ndarray
    reduced_rhs: np.ndarray
    snapshots: tuple[Snapshot, ...]
    labels: tuple[str, ...]

    @property
    def n(self) -> int:
        return self.M.shape[0]

    @property
    def diagonal(self) -> np.ndarray:
        return np.diag(self.M).copy()

    def leading_pivots(self) -> list[float]:
        """Entry (0, 0) of every recorded snapshot, from the input system down."""
        return [float(s.matrix[0, 0]) for s in self.snapshots]


def reduce_step(rows: list[list[Any]], rhs: list[Any], k: int) -> None:
    """Eliminate variable ``k`` (0-based) from the leading ``k + 1`` variables, in place."""
    pivot = rows[k][k]
    if not float(pivot) > 0.0:
        raise NotPositiveDefiniteError(k + 1, float(pivot))
    col = rows[k]
    for i in range(k):
        row = rows[i]
        for j in range(i + 1):
            row[j] = row[j] - col[i] * col[j] / pivot
        rhs[i] = rhs[i] - col[i] * rhs[k] / pivot


def eliminate(rows: list[list[Any]], rhs: list[Any], record: bool = True):
    """Run the reduction in place on lower-triangle ``rows`` and ``rhs``.

    Works on any scalar type with ``+ - * /`` and ``float()``; every product
    is formed before its division so each binary operation is a separate
    rounding site.  Returns the recorded ``(size, rows, rhs)`` states.
    """
    n = len(rhs)
    states = [(n, [list(r) for r in rows], list(rhs))] if record else []
    for k in range(n - 1, 0, -1):
        reduce_step(rows, rhs, k)
        if record:
            states.append((k, [list(r) for r in rows[:k]], list(rhs[:k])))
    if not float(rows[0][0]) > 0.0:
        raise NotPositiveDefiniteError(1, float(rows[0][0]))
    return states


def _symmetric(rows: Sequence[Sequence[Any]]) -> np.ndarray:
    k = len(rows)
    out = np.empty((k, k))
    for i in range(k):
        for j in range(i + 1):
            out[i, j] = out[j, i] = float(rows[i][j])
    out.setflags(write=False)
    return out


def _frozen(values) -> np.ndarray:
    arr = np.array([float(v) for v in values])
    arr.setflags(write=False)
    return arr


def build(rows, rhs, states, labels) -> ReverseCholesky:
    n = len(rhs)
    M = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1):
            M[i, j] = float(rows[i][j])
    M.setflags(write=False)
    snaps = tuple(Snapshot(size, _symmetric(r), _frozen(z)) for size, r, z in states)
    return ReverseCholesky(M, _frozen(rhs), snaps, tuple(labels))


def factor(
    S: NormalSystem,
    snapshots: bool | None = None,
    scalar: Callable[[float], Any] | None = None,
) -> ReverseCholesky:
    """Factor ``S`` by Laplace's elimination.

    ``snapshots`` defaults to on for n <= 64.  ``scalar`` wraps every input
    entry before elimination (the precision lab passes a rounding type).
    """
    if snapshots is None:
        snapshots = S.n <= SNAPSHOT_LIMIT
    wrap = scalar or float
    rows = [[wrap(v) for v in row] for row in S.lower_rows()]
    rhs = [wrap(float(v)) for v in S.rhs]
    states = eliminate(rows, rhs, record=snapshots)
    return build(rows, rhs, states, S.labels)


def reduce_once(S: NormalSystem) -> Snapshot:
    """One full-precision elimination of the last variable of ``S``."""
    if S.n < 2:
        raise ValueError("nothing to eliminate from a one-variable system")
    rows = S.lower_rows()
    rhs = [float(v) for v in S.rhs]
    reduce_step(rows, rhs, S.n - 1)
    k = S.n - 1
    return Snapshot(k, _symmetric(rows[:k]), _frozen(rhs[:k]))


def extract_L(f: ReverseCholesky) -> np.ndarray:
    """``L = D^(-1/2) M``: the lower factor with ``LᵀL = AᵀA`` and positive diagonal."""
    d = np.sqrt(np.diag(f.M))
    return f.M / d[:, None]


@dataclass(frozen=True)
class Solution:
    """Forward-solve result; only the first ``solved_prefix`` variables exist."""

    x: np.ndarray
    solved_prefix: int
    labels: tuple[str, ...]

    def __getitem__(self, j: int) -> float:
        if not 0 <= j < len(self.x):
            raise IndexError(f"variable index {j} out of range")
        if j >= self.solved_prefix:
            raise UnsolvedVariableError(
                f"variable {j} ({self.labels[j]}) was not solved; only the first "
                f"{self.solved_prefix} were"
            )
        return float(self.x[j])

    def __len__(self) -> int:
        return len(self.x)

    @property
    def values(self) -> np.ndarray:
        return self.x[: self.solved_prefix].copy()

    def is_solved(self, j: int) -> bool:
        return j < self.solved_prefix


def solve(f: ReverseCholesky, k: int | None = None) -> Solution:
    """Forward-substitute the first ``k`` variables (all of them by default)."""
    n = f.n
    if k is None:
        k = n
    if not 1 <= k <= n:
        raise ValueError(f"number of variables to solve must be in 1..{n}, got {k}")
    M, z = f.M, f.reduced_rhs
    x = np.full(n, math.nan)
    for j in range(k):
        acc = z[j]
        for i in range(j):
            acc -= M[j, i] * x[i]
        x[j] = acc / M[j, j]
    x.setflags(write=False)
    return Solution(x, k, f.labels)


def subsystem(f: ReverseCholesky, size: int) -> tuple[np.ndarray, np.ndarray]:
    """The recorded reduced system with ``size`` variables remaining."""
    if not f.snapshots:
        raise ValueError("factorization was computed without snapshots")
    if not 1 <= size <= f.n:
        raise ValueError(f"subsystem size must be in 1..{f.n}, got {size}")
    snap = f.snapshots[f.n - size]
    return snap.matrix.copy(), snap.rhs.copy()
