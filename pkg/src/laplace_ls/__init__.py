"""Laplace's reverse elimination for least squares, with poids and replication tools."""

from .errors import (
    DimensionError,
    FormatError,
    LaplaceError,
    NotPositiveDefiniteError,
    RankDeficiencyError,
    SingularMatrixError,
    UnknownDatasetError,
    UnsolvedVariableError,
)
from .matrix_core import DenseMatrix, NormalSystem, condition_number_2, gram, invert_spd, residual
from .reverse_mgs import QLFactors, reverse_mgs
from .reverse_cholesky import ReverseCholesky, Snapshot, extract_L, factor, solve, subsystem
from .inference import (
    ConfidenceQuery,
    PoidsReport,
    mass_from_correction,
    poids_first,
    prob_outside,
    prob_within,
    variance_for_variable,
)
from .precision import RoundedScalar, agreeing_digits, replay_factor, round_sig
from .bouvard import load_dataset, replicate

__version__ = "0.1.0"
