"""Replay the elimination in fixed significant-decimal-digit arithmetic.

Every ``+ - * /`` result is rounded to ``d`` significant decimal digits
(round half to even), a model of a computer working term by term with
seven-figure tables.  The replay is diffed against the double-precision run
and, optionally, against printed historical values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Mapping, Sequence

from .matrix_core import NormalSystem
from .reverse_cholesky import ReverseCholesky, Snapshot, factor, reduce_once

DEFAULT_DIGITS = 7
FULL_DIGITS = 15


def _round(x: float, d: int) -> float:
    if x == 0.0 or not math.isfinite(x):
        return x
    # float formatting is correctly rounded, ties to even
    return float(f"{x:.{d - 1}e}")


def round_sig(x: float, d: int) -> float:
    """Nearest value to ``x`` with ``d`` significant decimal digits (2 <= d <= 15)."""
    if not 2 <= d <= FULL_DIGITS:
        raise ValueError(f"digit count must be in 2..{FULL_DIGITS}, got {d}")
    return _round(float(x), d)


@dataclass(frozen=True)
class RoundedScalar:
    """A float kept at ``digits`` significant digits through arithmetic."""

    value: float
    digits: int = DEFAULT_DIGITS

    def __post_init__(self):
        object.__setattr__(self, "value", round_sig(self.value, self.digits))

    def _make(self, x: float) -> RoundedScalar:
        return RoundedScalar(x, self.digits)

    @staticmethod
    def _raw(other) -> float:
        return other.value if isinstance(other, RoundedScalar) else float(other)

    def __add__(self, other):
        return self._make(self.value + self._raw(other))

    def __radd__(self, other):
        return self._make(self._raw(other) + self.value)

    def __sub__(self, other):
        return self._make(self.value - self._raw(other))

    def __rsub__(self, other):
        return self._make(self._raw(other) - self.value)

    def __mul__(self, other):
        return self._make(self.value * self._raw(other))

    def __rmul__(self, other):
        return self._make(self._raw(other) * self.value)

    def __truediv__(self, other):
        return self._make(self.value / self._raw(other))

    def __rtruediv__(self, other):
        return self._make(self._raw(other) / self.value)

    def __neg__(self):
        return self._make(-self.value)

    def __float__(self) -> float:
        return self.value

    def __repr__(self) -> str:
        return f"RoundedScalar({self.value!r}, digits={self.digits})"


def agreeing_digits(value: float, reference: float, digits: int = FULL_DIGITS) -> int:
    """Leading significant digits of ``value`` that agree with ``reference``.

    Full agreement (``digits``) means ``value`` is ``reference`` correctly
    rounded to ``digits`` digits; otherwise it is ``floor(-log10(relerr))``
    clipped to ``0 .. digits - 1``.
    """
    if value == reference or value == _round(reference, digits):
        return digits
    if reference == 0.0:
        return 0
    rel = abs(value - reference) / abs(reference)
    return max(0, min(digits - 1, math.floor(-math.log10(rel))))


def printed_unit(text: str, placeholder_zeros: bool = True) -> float:
    """Value of one unit in the last significant place of a printed number.

    With ``placeholder_zeros`` the trailing zeros of an integer written
    without a decimal point are not significant: ``"-13208360"`` has unit
    10, ``"129"`` unit 1, ``"4.918"`` unit 0.001.  Without it every printed
    digit counts (``"-13208360"`` has unit 1).
    """
    text = text.strip()
    exponent = Decimal(text).as_tuple().exponent
    if placeholder_zeros and "." not in text and "e" not in text.lower() and exponent == 0:
        digits = text.lstrip("+-")
        stripped = digits.rstrip("0")
        if stripped:
            exponent = len(digits) - len(stripped)
    return float(Decimal(1).scaleb(exponent))


@dataclass(frozen=True)
class EntryDiff:
    """One coefficient (``col`` is None for a right-hand-side entry)."""

    size: int
    row: int
    col: int | None
    replayed: float
    reference: float
    agreement: int
    historical: str | None = None
    historical_reference: float | None = None
    historical_ok: bool | None = None

    @property
    def flagged(self) -> bool:
        return self.replay_flagged or self.historical_ok is False

    @property
    def replay_flagged(self) -> bool:
        return self.agreement < self._digits

    _digits: int = field(default=DEFAULT_DIGITS, repr=False)

    def to_dict(self) -> dict:
        out = {
            "size": self.size,
            "row": self.row,
            "col": self.col,
            "replayed": self.replayed,
            "reference": self.reference,
            "agreement": self.agreement,
            "flagged": self.flagged,
        }
        if self.historical is not None:
            out["historical"] = self.historical
            out["historical_reference"] = self.historical_reference
            out["historical_ok"] = self.historical_ok
        return out


@dataclass(frozen=True)
class DigitDiffReport:
    digits: int
    entries: tuple[EntryDiff, ...]

    def flagged(self) -> list[EntryDiff]:
        return [e for e in self.entries if e.flagged]

    def min_agreement(self) -> int:
        return min(e.agreement for e in self.entries)

    def total_disagreement(self) -> int:
        """Digits lost against the double-precision run, summed over entries.

        Counted out of the 15 digits a double carries, so reports at
        different working precisions are comparable.
        """
        return sum(FULL_DIGITS - agreeing_digits(e.replayed, e.reference) for e in self.entries)

    def for_size(self, size: int) -> list[EntryDiff]:
        return [e for e in self.entries if e.size == size]

    def to_dict(self) -> dict:
        return {
            "digits": self.digits,
            "total_disagreement": self.total_disagreement(),
            "entries": [e.to_dict() for e in self.entries],
        }


@dataclass(frozen=True)
class ReplayResult:
    replayed: ReverseCholesky
    reference: ReverseCholesky
    report: DigitDiffReport


# Historical printed systems: size -> (upper-triangle rows, rhs) as printed
# text.  Row i lists columns i..size-1, the layout of a printed table.
HistoricalSnapshots = Mapping[int, tuple[Sequence[Sequence[str]], Sequence[str]]]


def historical_system(printed: tuple[Sequence[Sequence[str]], Sequence[str]]) -> NormalSystem:
    rows, rhs = printed
    k = len(rhs)
    full = [[0.0] * k for _ in range(k)]
    for i, row in enumerate(rows):
        if len(row) != k - i:
            raise ValueError(f"printed row {i} has {len(row)} entries, expected {k - i}")
        for off, text in enumerate(row):
            full[i][i + off] = full[i + off][i] = float(text)
    return NormalSystem.from_matrix(full, [float(v) for v in rhs])


def stepwise_references(S: NormalSystem, historical: HistoricalSnapshots) -> dict[int, Snapshot]:
    """For each printed size k < n, reduce the printed size-(k+1) system once.

    This isolates the error made in each step from the error inherited from
    earlier steps.  The size-n system is ``S`` itself.
    """
    out = {}
    for size in sorted(historical, reverse=True):
        if size >= S.n:
            continue
        parent = S if size + 1 == S.n else historical_system(historical[size + 1])
        out[size] = reduce_once(parent)
    return out


def _within_half_unit(text: str, value: float) -> bool:
    return abs(float(text) - value) <= 0.5 * printed_unit(text, placeholder_zeros=False)


def replay_factor(
    S: NormalSystem,
    digits: int = DEFAULT_DIGITS,
    historical: HistoricalSnapshots | None = None,
) -> ReplayResult:
    """Factor ``S`` with every operation rounded to ``digits`` significant digits."""
    round_sig(1.0, digits)  # validates the digit count
    reference = factor(S, snapshots=True)
    replayed = factor(S, snapshots=True, scalar=lambda v: RoundedScalar(v, digits))
    step_refs = stepwise_references(S, historical) if historical else {}

    entries = []
    for rep, ref in zip(replayed.snapshots, reference.snapshots):
        printed = historical.get(rep.size) if historical else None
        step_ref = step_refs.get(rep.size)
        for i in range(rep.size):
            cells = [(j, float(rep.matrix[i, j]), float(ref.matrix[i, j])) for j in range(i, rep.size)]
            cells.append((None, float(rep.rhs[i]), float(ref.rhs[i])))
            for j, r, f in cells:
                kw = {}
                if printed is not None and step_ref is not None:
                    rows, rhs = printed
                    text = rhs[i] if j is None else rows[i][j - i]
                    href = float(step_ref.rhs[i]) if j is None else float(step_ref.matrix[i, j])
                    kw = dict(historical=text, historical_reference=href, historical_ok=_within_half_unit(text, href))
                entries.append(
                    EntryDiff(rep.size, i, j, r, f, agreeing_digits(r, f, digits), _digits=digits, **kw)
                )
    return ReplayResult(replayed, reference, DigitDiffReport(digits, tuple(entries)))
