"""Reverse square-root-free modified Gram-Schmidt (QL factorization).

Columns are eliminated last-first: every earlier column is projected
orthogonally to the current last column, which is then frozen into ``T``.
Put the variable of interest FIRST; its fully projected column ends up in
``T[:, 0]`` and ``dm[0]`` is the squared norm that sets its poids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, RankDeficiencyError
from .matrix_core import DenseMatrix, _dot, as_vector

RANK_TOL = 1e-13


@dataclass(frozen=True)
class QLFactors:
    """Output of :func:`reverse_mgs`.

    ``T`` has mutually orthogonal (unnormalized) columns with squared norms
    ``dm``; ``A = T @ unitL`` and ``A = Q @ L`` with ``Q = T / sqrt(dm)``.
    ``leading_norms`` traces the squared norm of the first column after each
    projection, starting with the unprojected column.
    """

    T: np.ndarray
    dm: np.ndarray
    L: np.ndarray
    unitL: np.ndarray
    leading_norms: tuple[float, ...]

    @property
    def Q(self) -> np.ndarray:
        return self.T / np.sqrt(self.dm)[None, :]


def reverse_mgs(A: DenseMatrix) -> QLFactors:
    """Factor ``A`` by successive orthogonal projections, last column first."""
    s, n = A.rows, A.cols
    work = np.array(A.data, dtype=float)
    T = np.zeros((s, n))
    dm = np.zeros(n)
    unit = np.eye(n)
    scale = max(_dot(work[:, j], work[:, j]) for j in range(n))
    leading = [_dot(work[:, 0], work[:, 0])]

    for k in range(n - 1, -1, -1):
        col = work[:, k].copy()
        norm2 = _dot(col, col)
        if not math.isfinite(norm2) or norm2 <= RANK_TOL * scale:
            raise RankDeficiencyError(k, A.labels[k], norm2)
        T[:, k] = col
        dm[k] = norm2
        for j in range(k):
            coef = _dot(col, work[:, j]) / norm2
            unit[k, j] = coef
            work[:, j] = work[:, j] - coef * col
        if k > 0:
            leading.append(_dot(work[:, 0], work[:, 0]))

    L = np.sqrt(dm)[:, None] * unit
    for arr in (T, dm, L, unit):
        arr.setflags(write=False)
    return QLFactors(T, dm, L, unit, tuple(leading))


def pythagorean_decomposition_check(A: DenseMatrix, u) -> tuple[float, float, float]:
    """Split ``‖A u‖²`` along the last column ``l`` of ``A``.

    Returns ``(‖A u‖², ‖A₁ u[:-1]‖², ‖l‖² (u[-1] + lᵀ A[:, :-1] u[:-1] / ‖l‖²)²)``
    where ``A₁`` is ``A[:, :-1]`` projected orthogonally to ``l``.  The first
    value equals the sum of the other two.
    """
    u = as_vector(u, "u")
    if u.shape[0] != A.cols:
        raise DimensionError(f"u has {u.shape[0]} entries, A has {A.cols} columns")
    data = A.data
    last = data[:, -1]
    l2 = _dot(last, last)
    head = data[:, :-1]
    uh = u[:-1]

    Au = data @ u
    total = _dot(Au, Au)

    if head.shape[1] == 0:
        projected = 0.0
        along = 0.0
    else:
        coefs = np.array([_dot(last, head[:, j]) for j in range(head.shape[1])]) / l2
        A1 = head - np.outer(last, coefs)
        v = A1 @ uh
        projected = _dot(v, v)
        along = _dot(last, head @ uh) / l2
    along_term = l2 * (u[-1] + along) ** 2
    return total, projected, along_term
