"""Refitting and evaluating the BAD regression equation.

The model's output is a weighted sum of nine z-score normalized indices plus
an intercept.  d_r is exported by the device but carries no weight, so it is
excluded from the design matrix here (it stays in the dataset for
diagnostics).  Because the output is an exact linear function of the indices,
refitting on any sample recovers the weights essentially exactly, regardless
of how normal or abnormal the sample is.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import published
from .dataset import ExamDataset
from .diagnostics import CorrelationMatrix
from .errors import InsufficientDataError
from .regression import ols

MODEL_INDICES = published.MODEL_INDICES

# A D-index vector is a mapping from index name to value in SD units.
DVector = Mapping[str, float]


@dataclass(frozen=True)
class BadFit:
    """Recovered regression weights, intercept, and fit quality."""

    weights: dict[str, float]
    intercept_c: float
    adjusted_r_squared: float
    n: int
    residual_max_abs: float

    def __post_init__(self):
        missing = set(MODEL_INDICES) - set(self.weights)
        if missing:
            raise ValueError(f"weights missing for {sorted(missing)}")
        if self.n <= 10:
            raise ValueError(f"n must exceed the parameter count, got {self.n}")

    def to_dict(self) -> dict:
        return {
            "intercept_c": self.intercept_c,
            "weights": {name: self.weights[name] for name in MODEL_INDICES},
            "adjusted_r_squared": self.adjusted_r_squared,
            "n": self.n,
            "residual_max_abs": self.residual_max_abs,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, raw: dict) -> "BadFit":
        return cls(
            weights={name: float(v) for name, v in raw["weights"].items()},
            intercept_c=float(raw["intercept_c"]),
            adjusted_r_squared=float(raw.get("adjusted_r_squared", 1.0)),
            n=int(raw.get("n", 11)),
            residual_max_abs=float(raw.get("residual_max_abs", 0.0)),
        )

    def to_csv_row(self) -> str:
        """Single-row CSV: intercept first, then the nine weights."""
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["c"] + [f"w_{name[2:]}" for name in MODEL_INDICES])
        writer.writerow([repr(self.intercept_c)] + [repr(self.weights[name]) for name in MODEL_INDICES])
        return buffer.getvalue()


def published_fit() -> BadFit:
    """The published weights and intercept, packaged as a fit."""
    return BadFit(
        weights=dict(published.REGRESSION_WEIGHTS),
        intercept_c=published.INTERCEPT_C,
        adjusted_r_squared=1.0,
        n=1603,
        residual_max_abs=0.0,
    )


def fit_bad(ds: ExamDataset, min_rows: int = 50) -> BadFit:
    """OLS of d_final on the nine model indices, with intercept.

    Rows missing any index or d_final are dropped; at least ``min_rows``
    complete rows are required.
    """
    matrix = np.column_stack([ds.column(name) for name in MODEL_INDICES] + [ds.column("d_final")])
    complete = np.all(np.isfinite(matrix), axis=1)
    matrix = matrix[complete]
    if matrix.shape[0] < min_rows:
        raise InsufficientDataError(
            f"need at least {min_rows} complete rows, got {matrix.shape[0]}"
        )
    fit = ols(matrix[:, :-1], matrix[:, -1], column_names=list(MODEL_INDICES))
    return BadFit(
        weights={name: float(w) for name, w in zip(MODEL_INDICES, fit.coef)},
        intercept_c=fit.intercept,
        adjusted_r_squared=fit.adjusted_r_squared,
        n=fit.n,
        residual_max_abs=float(np.max(np.abs(fit.residuals))),
    )


def predict_dfinal(fit: BadFit, d: DVector | Sequence[float]) -> float:
    """Evaluate the regression equation at a D-index vector."""
    if isinstance(d, Mapping):
        values = [float(d[name]) for name in MODEL_INDICES]
    else:
        values = [float(v) for v in d]
        if len(values) != len(MODEL_INDICES):
            raise ValueError(f"expected {len(MODEL_INDICES)} index values, got {len(values)}")
    if not all(math.isfinite(v) for v in values):
        raise ValueError("D-index values must be finite")
    # fsum in fixed index order: keeps this exactly consistent with the
    # mean-shift decomposition identity.
    return fit.intercept_c + math.fsum(
        fit.weights[name] * value for name, value in zip(MODEL_INDICES, values)
    )


def sd_final(
    weights: Mapping[str, float] | Sequence[float],
    corr: CorrelationMatrix | np.ndarray,
) -> float:
    """Standard deviation of the weighted sum implied by the correlations.

    For unit-variance indices the output's SD is the square root of the
    quadratic form w' R w.  A correlation matrix that is not positive
    semidefinite makes the radicand negative, which is rejected.
    """
    if isinstance(corr, CorrelationMatrix):
        labels = corr.labels
        matrix = corr.values
    else:
        matrix = np.asarray(corr, dtype=float)
        labels = None

    if isinstance(weights, Mapping):
        if labels is None:
            raise ValueError("mapping weights need a labelled correlation matrix")
        w = np.array([float(weights[name]) for name in labels])
    else:
        w = np.asarray(weights, dtype=float)

    if matrix.shape != (w.size, w.size):
        raise ValueError(f"correlation shape {matrix.shape} does not match {w.size} weights")
    if not np.all(np.isfinite(matrix)):
        raise ValueError("correlation matrix has undefined entries")
    if not np.allclose(matrix, matrix.T, atol=1e-12):
        raise ValueError("correlation matrix must be symmetric")
    if not np.allclose(np.diag(matrix), 1.0, atol=1e-12):
        raise ValueError("correlation matrix must have a unit diagonal")
    if np.any(np.abs(matrix) > 1.0 + 1e-12):
        raise ValueError("correlation entries must lie in [-1, 1]")

    radicand = float(w @ matrix @ w)
    if radicand < 0.0:
        raise ValueError(
            f"negative radicand ({radicand:.3e}): correlation matrix is not positive semidefinite"
        )
    return math.sqrt(radicand)


def art(pachy_min: float, ppi: float) -> float:
    """Ambrosio Relational Thickness: thinnest pachymetry over progression."""
    if ppi <= 0:
        raise ValueError(f"ppi must be positive, got {ppi}")
    return pachy_min / ppi


@dataclass(frozen=True)
class MeanShiftDecomposition:
    """How non-zero index means shift the model output away from C."""

    intercept_c: float
    contributions: dict[str, float]
    total: float


def mean_shift_decomposition(fit: BadFit, index_means: Mapping[str, float]) -> MeanShiftDecomposition:
    """Decompose the expected output into C plus per-index mean shifts.

    ``total`` equals the regression equation evaluated at the vector of index
    means, exactly; on a fitted sample it therefore reproduces the sample mean
    of d_final.
    """
    contributions = {
        name: fit.weights[name] * float(index_means.get(name, 0.0)) for name in MODEL_INDICES
    }
    total = fit.intercept_c + math.fsum(contributions[name] for name in MODEL_INDICES)
    return MeanShiftDecomposition(intercept_c=fit.intercept_c, contributions=contributions, total=total)
