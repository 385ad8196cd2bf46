import numpy as np
import pytest
from hypothesis import given, settings

from laplace_ls.errors import FormatError
from laplace_ls.fileformats import (
    parse_normal_system,
    parse_regression,
    read_system,
    serialize_normal_system,
    serialize_regression,
    system_from_regression,
    write_system,
)
from laplace_ls.matrix_core import gram

from conftest import regressions

SMALL = """\
normal-system v1
# a comment
n 2
s 10
rss 3.5   # trailing comment
row 1: 4
row 2: 2 5
rhs: 1 1
"""


def test_parse_small():
    S = parse_normal_system(SMALL)
    assert S.n == 2 and S.s == 10 and S.rss == 3.5
    assert np.array_equal(S.matrix(), [[4.0, 2.0], [2.0, 5.0]])
    assert np.array_equal(S.rhs, [1.0, 1.0])


@pytest.mark.parametrize(
    "text, line, fragment",
    [
        ("normal-system v2\n", 1, "header"),
        ("normal-system v1\nn 2\nrow 1: 4\nrow 2: 2\nrhs: 1 1\n", 4, "expected 2"),
        ("normal-system v1\nn 2\nrow 1: 4\nrow 2: 2 x\nrhs: 1 1\n", 4, "not a real"),
        ("normal-system v1\nn 2\nrow 1: 4\nrow 1: 4\n", 4, "duplicate"),
        ("normal-system v1\nn 2\nrow 1: 4\nrhs: 1 1\n", 4, "missing row"),
        ("normal-system v1\nn 1\nrow 1: 4\nrhs: 1 1\n", 4, "rhs has 2"),
        ("normal-system v1\nn 1\nrow 1: 4\nbogus 3\n", 4, "unknown directive"),
        ("normal-system v1\nn 1\nrow 1: inf\nrhs: 1\n", 3, "non-finite"),
        ("normal-system v1\nn 0\n", 2, "positive"),
        ("normal-system v1\nrow 1: 4\n", 2, "before 'n'"),
        ("normal-system v1\nn 1\nrss -1\nrow 1: 4\nrhs: 1\n", 3, "nonnegative"),
    ],
)
def test_parse_errors_carry_line_numbers(text, line, fragment):
    with pytest.raises(FormatError) as err:
        parse_normal_system(text)
    assert err.value.line == line
    assert fragment in str(err.value)
    assert str(err.value).startswith(f"line {line}: ")


def test_not_positive_diagonal_is_format_error():
    with pytest.raises(FormatError):
        parse_normal_system("normal-system v1\nn 1\nrow 1: 0\nrhs: 1\n")


def test_regression_file_to_normal_system(tmp_path):
    text = "regression v1\nrows 3\ncols 2\n1 0\n1 1\n1 2\nobs: 0 1 1\n"
    path = tmp_path / "r.txt"
    path.write_text(text)
    S = read_system(path)
    assert np.array_equal(S.matrix(), [[3.0, 3.0], [3.0, 5.0]])
    assert S.s == 3
    # fit y = 1/6 + x/2, residuals (-1/6, 1/3, -1/6)
    assert S.rss == pytest.approx(1.0 / 6.0, rel=1e-14)


def test_regression_without_obs_cannot_form_system(tmp_path):
    path = tmp_path / "r.txt"
    path.write_text("regression v1\nrows 1\ncols 1\n2\n")
    A, obs = parse_regression(path.read_text())
    assert obs is None and A.rows == 1
    with pytest.raises(FormatError):
        read_system(path)


@pytest.mark.parametrize(
    "text",
    [
        "regression v1\ncols 1\n1\n",
        "regression v1\nrows 2\ncols 1\n1\n",
        "regression v1\nrows 1\ncols 2\n1\n",
        "regression v1\nrows 1\ncols 1\n1\n2\n",
        "regression v1\nrows 1\ncols 1\n1\nobs: 1 2\n",
    ],
)
def test_regression_parse_errors(text):
    with pytest.raises(FormatError):
        parse_regression(text)


@settings(max_examples=60, deadline=None)
@given(regressions())
def test_round_trips_are_exact(case):
    A, b = case
    S = gram(A, b).with_rss(1.25, A.rows)
    again = parse_normal_system(serialize_normal_system(S))
    assert np.array_equal(again.lower, S.lower) and np.array_equal(again.rhs, S.rhs)
    assert (again.s, again.rss) == (S.s, S.rss)
    A2, b2 = parse_regression(serialize_regression(A, b))
    assert np.array_equal(A2.data, A.data) and np.array_equal(b2, b)


def test_write_then_read(tmp_path, saturn):
    path = tmp_path / "saturn.txt"
    write_system(saturn.system, path)
    S = read_system(path)
    assert np.array_equal(S.lower, saturn.system.lower)
    assert S.s == 129 and S.rss == 31096.0


def test_system_from_regression_matches_gram(rng):
    from conftest import random_full_rank

    A = random_full_rank(rng, 12, 3)
    b = rng.standard_normal(12)
    S = system_from_regression(A, b)
    assert np.array_equal(S.lower, gram(A, b).lower)
    x = np.linalg.lstsq(A.data, b, rcond=None)[0]
    assert S.rss == pytest.approx(float(np.sum((b - A.data @ x) ** 2)), rel=1e-10)
