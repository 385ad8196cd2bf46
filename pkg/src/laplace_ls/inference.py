"""Poids, standard deviations, 2x2 covariance blocks and confidence levels.

Laplace's poids of an estimate is ``P = 1 / (2 σ²)``.  For the variable
eliminated last, with ``m`` its final reduced squared norm, the marginal
density is proportional to ``exp(-P u²)`` where ``P = m / (2 σ_b²)`` and
``σ_b² ≈ rss / s``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import LaplaceError, SingularMatrixError
from .matrix_core import NormalSystem
from .reverse_cholesky import ReverseCholesky, factor


def noise_variance(rss: float, s: int, n: int = 0, unbiased: bool = False) -> float:
    """``rss / s``, or ``rss / (s - n)`` when ``unbiased``."""
    if not rss > 0.0:
        raise ValueError(f"rss must be positive, got {rss!r}")
    dof = s - n if unbiased else s
    if dof <= 0:
        raise ValueError(f"need s > n for the unbiased estimate (s={s}, n={n})")
    return rss / dof


def sigma_from_poids(poids: float) -> float:
    return 1.0 / math.sqrt(2.0 * poids)


def poids_from_sigma(sigma: float) -> float:
    return 1.0 / (2.0 * sigma * sigma)


@dataclass(frozen=True)
class PoidsReport:
    variable: int
    poids: float
    log10_poids: float
    sigma: float
    sigma_b2_estimate: float
    label: str = ""

    @classmethod
    def from_pivot(cls, variable: int, pivot: float, sigma_b2: float, label: str = "") -> PoidsReport:
        if not pivot > 0.0:
            raise SingularMatrixError(f"pivot for variable {variable} is not positive: {pivot!r}")
        poids = pivot / (2.0 * sigma_b2)
        return cls(variable, poids, math.log10(poids), sigma_from_poids(poids), sigma_b2, label)


def poids_first(f: ReverseCholesky, s: int, rss: float, unbiased: bool = False) -> PoidsReport:
    """Poids of variable 0 from the fully reduced pivot ``M[0, 0]``."""
    if s is None or s <= 0:
        raise ValueError(f"observation count must be positive, got {s!r}")
    sigma_b2 = noise_variance(rss, s, f.n, unbiased)
    label = f.labels[0] if f.labels else ""
    return PoidsReport.from_pivot(0, float(f.M[0, 0]), sigma_b2, label)


def marginal_density_coefficient(f: ReverseCholesky, s: int, rss: float, unbiased: bool = False) -> float:
    """Coefficient of ``u²`` in the exponent of the first variable's marginal density.

    Identical to the poids; exposed separately so callers can state which
    quantity they mean.
    """
    return poids_first(f, s, rss, unbiased).poids


def _require_stats(S: NormalSystem) -> tuple[int, float]:
    if S.s is None or S.rss is None:
        raise LaplaceError("normal system needs s and rss for variance computations")
    return S.s, S.rss


def variance_for_variable(S: NormalSystem, j: int, unbiased: bool = False) -> PoidsReport:
    """Poids and σ of variable ``j`` (0-based).

    Swaps ``j`` with variable 0 (the letter swap) and refactors from
    scratch so that ``j`` is eliminated last.
    """
    s, rss = _require_stats(S)
    if not 0 <= j < S.n:
        raise IndexError(f"variable index {j} out of range for n={S.n}")
    order = list(range(S.n))
    order[0], order[j] = order[j], order[0]
    f = factor(S.permuted(order), snapshots=False)
    report = poids_first(f, s, rss, unbiased)
    return PoidsReport(j, report.poids, report.log10_poids, report.sigma, report.sigma_b2_estimate, S.labels[j])


def covariance_block2(f: ReverseCholesky, s: int, rss: float, unbiased: bool = False) -> np.ndarray:
    """Covariance of the first two variables from the size-2 reduced system."""
    if f.n < 2:
        raise ValueError("a 2x2 covariance block needs at least two variables")
    if not f.snapshots:
        raise ValueError("factorization was computed without snapshots")
    block = f.snapshots[f.n - 2].matrix
    a, b, c = float(block[0, 0]), float(block[1, 0]), float(block[1, 1])
    det = a * c - b * b
    if not det > 0.0:
        raise SingularMatrixError(f"2x2 block is singular (determinant {det!r})")
    scale = noise_variance(rss, s, f.n, unbiased) / det
    return np.array([[c * scale, -b * scale], [-b * scale, a * scale]])


@dataclass(frozen=True)
class ConfidenceQuery:
    """Probability that the error lies in ``[-half_width, half_width]`` under poids ``poids``."""

    poids: float
    half_width: float

    def __post_init__(self):
        if not self.poids > 0.0:
            raise ValueError(f"poids must be positive, got {self.poids!r}")
        if not self.half_width >= 0.0:
            raise ValueError(f"half_width must be nonnegative, got {self.half_width!r}")

    @classmethod
    def from_log10(cls, log10_poids: float, half_width: float) -> ConfidenceQuery:
        return cls(10.0 ** log10_poids, half_width)


# math.erf / math.erfc are the C library implementations (error well below
# 1e-15 absolute); erfc keeps full relative precision in the far tail.
def prob_within(q: ConfidenceQuery) -> float:
    """``sqrt(P/π) ∫_{-U}^{U} exp(-P u²) du = erf(U sqrt(P))``."""
    return math.erf(q.half_width * math.sqrt(q.poids))


def prob_outside(q: ConfidenceQuery) -> float:
    """Complement of :func:`prob_within`, accurate for tiny tail masses."""
    return math.erfc(q.half_width * math.sqrt(q.poids))


def odds_against(q: ConfidenceQuery) -> float:
    """``D`` such that the error exceeds the bound about once in ``D`` trials."""
    tail = prob_outside(q)
    return math.inf if tail == 0.0 else 1.0 / tail


def mass_from_correction(z: float, base: float) -> float:
    """Planetary mass ``(1 + z) / base`` in units of the solar mass."""
    if not base > 0.0:
        raise ValueError(f"base must be positive, got {base!r}")
    if not 1.0 + z > 0.0:
        raise ValueError(f"1 + z must be positive, got z={z!r}")
    return (1.0 + z) / base


def mass_denominator(z: float, base: float) -> float:
    """The ``D`` in "one part in D" for :func:`mass_from_correction`."""
    return 1.0 / mass_from_correction(z, base)
