"""Line-oriented text formats for normal systems and regression matrices.

normal-system v1::

    normal-system v1
    n 2
    s 10          # optional
    rss 3.5       # optional
    row 1: 4
    row 2: 2 5
    rhs: 1 1

regression v1::

    regression v1
    rows 3
    cols 2
    1 0
    1 1
    1 2
    obs: 0.1 0.9 2.1   # optional

``#`` starts a comment; blank lines are ignored.  Values are written with
17 significant digits so that parse(serialize(x)) == x exactly.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .errors import FormatError
from .matrix_core import DenseMatrix, NormalSystem, gram, residual

NORMAL_HEADER = "normal-system v1"
REGRESSION_HEADER = "regression v1"


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def _lines(text: str):
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield number, line


def _reals(fields: list[str], lineno: int) -> list[float]:
    out = []
    for f in fields:
        try:
            v = float(f)
        except ValueError:
            raise FormatError(f"not a real number: {f!r}", lineno) from None
        if not math.isfinite(v):
            raise FormatError(f"non-finite value: {f!r}", lineno)
        out.append(v)
    return out


def _count(fields: list[str], key: str, lineno: int) -> int:
    if len(fields) != 2:
        raise FormatError(f"expected '{key} <int>'", lineno)
    try:
        value = int(fields[1])
    except ValueError:
        raise FormatError(f"{key} must be an integer, got {fields[1]!r}", lineno) from None
    if value < 1:
        raise FormatError(f"{key} must be positive", lineno)
    return value


def header_of(text: str) -> str | None:
    for _, line in _lines(text):
        return line
    return None


def parse_normal_system(text: str) -> NormalSystem:
    lines = list(_lines(text))
    if not lines or lines[0][1] != NORMAL_HEADER:
        raise FormatError(f"missing header {NORMAL_HEADER!r}", lines[0][0] if lines else None)
    n = s = rss = None
    rows: dict[int, list[float]] = {}
    rhs = None
    last = lines[0][0]
    for lineno, line in lines[1:]:
        last = lineno
        fields = line.split()
        key = fields[0]
        if key == "n":
            n = _count(fields, "n", lineno)
        elif key == "s":
            s = _count(fields, "s", lineno)
        elif key == "rss":
            if len(fields) != 2:
                raise FormatError("expected 'rss <real>'", lineno)
            rss = _reals(fields[1:], lineno)[0]
            if rss < 0:
                raise FormatError("rss must be nonnegative", lineno)
        elif key == "row":
            if n is None:
                raise FormatError("'row' before 'n'", lineno)
            head, _, rest = line.partition(":")
            parts = head.split()
            if len(parts) != 2 or not _:
                raise FormatError("expected 'row <i>: <values>'", lineno)
            try:
                i = int(parts[1])
            except ValueError:
                raise FormatError(f"row index must be an integer, got {parts[1]!r}", lineno) from None
            if not 1 <= i <= n:
                raise FormatError(f"row index {i} outside 1..{n}", lineno)
            if i in rows:
                raise FormatError(f"duplicate row {i}", lineno)
            values = _reals(rest.split(), lineno)
            if len(values) != i:
                raise FormatError(f"row {i} has {len(values)} values, expected {i}", lineno)
            rows[i] = values
        elif key.startswith("rhs"):
            if n is None:
                raise FormatError("'rhs' before 'n'", lineno)
            head, sep, rest = line.partition(":")
            if head.strip() != "rhs" or not sep:
                raise FormatError("expected 'rhs: <values>'", lineno)
            rhs = _reals(rest.split(), lineno)
            if len(rhs) != n:
                raise FormatError(f"rhs has {len(rhs)} values, expected {n}", lineno)
        else:
            raise FormatError(f"unknown directive {key!r}", lineno)
    if n is None:
        raise FormatError("missing 'n'", last)
    missing = [i for i in range(1, n + 1) if i not in rows]
    if missing:
        raise FormatError(f"missing row(s) {missing}", last)
    if rhs is None:
        raise FormatError("missing 'rhs:'", last)
    try:
        return NormalSystem.from_rows([rows[i] for i in range(1, n + 1)], rhs, s, rss)
    except ValueError as exc:
        raise FormatError(str(exc), None) from exc


def serialize_normal_system(S: NormalSystem) -> str:
    out = [NORMAL_HEADER, f"n {S.n}"]
    if S.s is not None:
        out.append(f"s {S.s}")
    if S.rss is not None:
        out.append(f"rss {fmt(S.rss)}")
    for i, row in enumerate(S.lower_rows(), start=1):
        out.append(f"row {i}: " + " ".join(fmt(v) for v in row))
    out.append("rhs: " + " ".join(fmt(v) for v in S.rhs))
    return "\n".join(out) + "\n"


def parse_regression(text: str) -> tuple[DenseMatrix, np.ndarray | None]:
    lines = list(_lines(text))
    if not lines or lines[0][1] != REGRESSION_HEADER:
        raise FormatError(f"missing header {REGRESSION_HEADER!r}", lines[0][0] if lines else None)
    nrows = ncols = None
    data: list[list[float]] = []
    obs = None
    last = lines[0][0]
    for lineno, line in lines[1:]:
        last = lineno
        fields = line.split()
        if fields[0] == "rows":
            nrows = _count(fields, "rows", lineno)
        elif fields[0] == "cols":
            ncols = _count(fields, "cols", lineno)
        elif fields[0].startswith("obs"):
            head, sep, rest = line.partition(":")
            if head.strip() != "obs" or not sep:
                raise FormatError("expected 'obs: <values>'", lineno)
            if nrows is None:
                raise FormatError("'obs' before 'rows'", lineno)
            obs = _reals(rest.split(), lineno)
            if len(obs) != nrows:
                raise FormatError(f"obs has {len(obs)} values, expected {nrows}", lineno)
        else:
            if nrows is None or ncols is None:
                raise FormatError("matrix data before 'rows' and 'cols'", lineno)
            values = _reals(fields, lineno)
            if len(values) != ncols:
                raise FormatError(f"matrix row has {len(values)} values, expected {ncols}", lineno)
            if len(data) == nrows:
                raise FormatError(f"more than {nrows} matrix rows", lineno)
            data.append(values)
    if nrows is None or ncols is None:
        raise FormatError("missing 'rows' or 'cols'", last)
    if len(data) != nrows:
        raise FormatError(f"found {len(data)} matrix rows, expected {nrows}", last)
    try:
        A = DenseMatrix(np.array(data))
    except ValueError as exc:
        raise FormatError(str(exc), None) from exc
    return A, None if obs is None else np.array(obs)


def serialize_regression(A: DenseMatrix, obs=None) -> str:
    out = [REGRESSION_HEADER, f"rows {A.rows}", f"cols {A.cols}"]
    out += [" ".join(fmt(v) for v in row) for row in A.data]
    if obs is not None:
        out.append("obs: " + " ".join(fmt(v) for v in obs))
    return "\n".join(out) + "\n"


def system_from_regression(A: DenseMatrix, obs) -> NormalSystem:
    """Normal equations plus s and the residual sum of squares of the fit."""
    from .reverse_cholesky import factor, solve

    S = gram(A, obs)
    x = solve(factor(S, snapshots=False)).values
    _, rss = residual(A, x, obs)
    return S.with_rss(rss, A.rows)


def read_system(path: str | Path) -> NormalSystem:
    """Load either file format; regression files must carry ``obs``."""
    text = Path(path).read_text(encoding="utf-8")
    header = header_of(text)
    if header == REGRESSION_HEADER:
        A, obs = parse_regression(text)
        if obs is None:
            raise FormatError("regression file needs 'obs:' to form a normal system", None)
        return system_from_regression(A, obs)
    return parse_normal_system(text)


def write_system(S: NormalSystem, path: str | Path) -> None:
    Path(path).write_text(serialize_normal_system(S), encoding="utf-8")
