import numpy as np
import pytest
from hypothesis import strategies as st

from laplace_ls.matrix_core import DenseMatrix


def random_full_rank(rng: np.random.Generator, s: int, n: int) -> DenseMatrix:
    """Gaussian matrix with a few columns rescaled; full rank with probability one."""
    data = rng.standard_normal((s, n)) * rng.uniform(0.5, 4.0, size=n)[None, :]
    return DenseMatrix(data)


@st.composite
def regressions(draw, max_s=20, max_n=8):
    n = draw(st.integers(1, max_n))
    s = draw(st.integers(n, max_s))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    A = random_full_rank(rng, s, n)
    b = rng.standard_normal(s) * 3.0
    return A, b


@pytest.fixture
def rng():
    return np.random.default_rng(20260423)


@pytest.fixture
def saturn():
    from laplace_ls.bouvard import load_dataset

    return load_dataset("saturn-motion")
