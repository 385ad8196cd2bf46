"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class LaplaceError(Exception):
    """Base class for all domain errors raised by this package."""


class DimensionError(LaplaceError, ValueError):
    """Operand shapes do not agree."""


class SingularMatrixError(LaplaceError):
    """A matrix that must be invertible is not (numerically)."""


class NotPositiveDefiniteError(SingularMatrixError):
    """An elimination pivot was not strictly positive.

    ``step`` is the 1-based index of the variable being eliminated when the
    bad pivot was met (``n`` for the first elimination, ``1`` for the last
    remaining pivot).
    """

    def __init__(self, step: int, pivot: float):
        self.step = step
        self.pivot = pivot
        super().__init__(
            f"system is not positive definite: pivot {pivot!r} at elimination step k={step}"
        )


class RankDeficiencyError(SingularMatrixError):
    """A projected column of the regression matrix vanished."""

    def __init__(self, column: int, label: str, norm2: float):
        self.column = column
        self.label = label
        self.norm2 = norm2
        super().__init__(
            f"regression matrix is rank deficient: column {column} ({label}) "
            f"has projected squared norm {norm2!r}"
        )


class UnsolvedVariableError(LaplaceError, IndexError):
    """Access to a variable that the partial forward solve did not compute."""


class UnknownDatasetError(LaplaceError, KeyError):
    """Requested a dataset that is not embedded in the package."""

    def __str__(self) -> str:  # KeyError quotes its argument otherwise
        return str(self.args[0]) if self.args else ""


class FormatError(LaplaceError, ValueError):
    """Malformed input file; ``line`` is 1-based, or None when not line-specific."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        self.message = message
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)
