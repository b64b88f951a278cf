"""Multicollinearity and nonlinearity diagnostics for the D indices.

Correlations use pairwise deletion of missing values; VIF uses listwise
deletion.  VIF can be computed two ways (per-predictor regression, or the
diagonal of the inverse correlation matrix) which agree in exact arithmetic;
keeping both routes gives the test suite an internal consistency oracle.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .dataset import ExamDataset
from .errors import InsufficientDataError
from .regression import ols


def _columns_from(data, names: Sequence[str]) -> dict[str, np.ndarray]:
    if isinstance(data, ExamDataset):
        return {name: data.column(name) for name in names}
    return {name: np.asarray(data[name], dtype=float) for name in names}


@dataclass(frozen=True)
class CorrelationMatrix:
    """Pearson correlations with labels; NaN marks an undefined entry."""

    labels: tuple[str, ...]
    values: np.ndarray
    undefined: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        n = len(self.labels)
        if values.shape != (n, n):
            raise ValueError(f"matrix shape {values.shape} does not match {n} labels")
        finite = np.isfinite(values)
        if not np.array_equal(finite, finite.T):
            raise ValueError("correlation matrix must be symmetric (missing entries must mirror)")
        if not np.allclose(
            np.where(finite, values, 0.0), np.where(finite.T, values.T, 0.0), atol=1e-12
        ):
            raise ValueError("correlation matrix must be symmetric")
        diag = np.diag(values)
        if not np.allclose(diag[np.isfinite(diag)], 1.0, atol=1e-12):
            raise ValueError("correlation matrix must have a unit diagonal")

    def get(self, a: str, b: str) -> float:
        return float(self.values[self.labels.index(a), self.labels.index(b)])

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow([""] + list(self.labels))
        for i, label in enumerate(self.labels):
            row = [label]
            for j in range(len(self.labels)):
                v = self.values[i, j]
                row.append("" if not math.isfinite(v) else f"{v:.6f}")
            writer.writerow(row)
        return buffer.getvalue()


def correlation_matrix(data, columns: Sequence[str]) -> CorrelationMatrix:
    """Pairwise-complete Pearson correlation over the named columns.

    Pairs with a zero-variance or too-small (< 3 rows) complete subset are
    reported as undefined entries rather than propagating NaN.
    """
    arrays = _columns_from(data, columns)
    p = len(columns)
    values = np.eye(p)
    undefined: list[tuple[str, str]] = []
    for i in range(p):
        for j in range(i + 1, p):
            a, b = arrays[columns[i]], arrays[columns[j]]
            mask = np.isfinite(a) & np.isfinite(b)
            if mask.sum() < 3:
                values[i, j] = values[j, i] = math.nan
                undefined.append((columns[i], columns[j]))
                continue
            av, bv = a[mask], b[mask]
            sa, sb = av.std(), bv.std()
            if sa == 0.0 or sb == 0.0:
                values[i, j] = values[j, i] = math.nan
                undefined.append((columns[i], columns[j]))
                continue
            r = float(np.mean((av - av.mean()) * (bv - bv.mean())) / (sa * sb))
            values[i, j] = values[j, i] = min(1.0, max(-1.0, r))
    return CorrelationMatrix(labels=tuple(columns), values=values, undefined=tuple(undefined))


@dataclass(frozen=True)
class VifReport:
    """Variance inflation factors; ``math.inf`` marks perfect collinearity."""

    values: dict[str, float]
    threshold: float = 5.0
    notes: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        for name, value in self.values.items():
            if value < 1.0 - 1e-9:
                raise ValueError(f"VIF for {name} below 1: {value}")

    @property
    def flagged(self) -> list[str]:
        return [name for name, value in self.values.items() if value > self.threshold]

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["index", "vif", "flagged", "note"])
        for name in sorted(self.values):
            value = self.values[name]
            writer.writerow(
                [
                    name,
                    "inf" if math.isinf(value) else f"{value:.6f}",
                    str(value > self.threshold).lower(),
                    self.notes.get(name, ""),
                ]
            )
        return buffer.getvalue()


def vif(data, indices: Sequence[str], threshold: float = 5.0) -> VifReport:
    """VIF of each index from regressing it on all the others (with intercept).

    Rows missing any of the indices are dropped (listwise deletion); at least
    ``len(indices) + 2`` complete rows are required.
    """
    arrays = _columns_from(data, indices)
    matrix = np.column_stack([arrays[name] for name in indices])
    complete = np.all(np.isfinite(matrix), axis=1)
    matrix = matrix[complete]
    if matrix.shape[0] < len(indices) + 2:
        raise InsufficientDataError(
            f"need at least {len(indices) + 2} complete rows, got {matrix.shape[0]}"
        )

    values: dict[str, float] = {}
    notes: dict[str, str] = {}
    for k, name in enumerate(indices):
        others = np.delete(matrix, k, axis=1)
        fit = ols(others, matrix[:, k], allow_rank_deficient=True)
        one_minus_r2 = 1.0 - fit.r_squared
        if one_minus_r2 < 1e-12:
            values[name] = math.inf
            notes[name] = "perfectly collinear with the other indices"
        else:
            values[name] = max(1.0, 1.0 / one_minus_r2)
    return VifReport(values=values, threshold=threshold, notes=notes)


def vif_from_correlation(corr: CorrelationMatrix | np.ndarray, labels=None) -> dict[str, float]:
    """Independent VIF route: diagonal of the inverse correlation matrix."""
    if isinstance(corr, CorrelationMatrix):
        labels = corr.labels
        matrix = corr.values
    else:
        matrix = np.asarray(corr, dtype=float)
        labels = labels or [f"x{j}" for j in range(matrix.shape[0])]
    if not np.all(np.isfinite(matrix)):
        raise ValueError("correlation matrix has undefined entries")
    diag = np.diag(np.linalg.inv(matrix))
    return {name: float(v) for name, v in zip(labels, diag)}


@dataclass(frozen=True)
class LoessCurve:
    """Local-linear smoother evaluated on a uniform grid."""

    grid: np.ndarray
    values: np.ndarray
    span: float
    window: int


def loess_smooth(x, y, span: float = 0.75, grid_size: int = 101) -> LoessCurve:
    """Local linear regression with tricube weights.

    Parameters
    ----------
    x, y : array-like
        Observed points; at least 10 are required.
    span : float in (0, 1]
        Fraction of the sample used in each local window.  Windows smaller
        than 3 points are expanded to 3.
    grid_size : int
        The curve is evaluated at this many evenly spaced points across
        [min(x), max(x)].

    No robustness iterations are performed; this is the smallest faithful
    smoother for the linearity diagnostics in this package.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be one-dimensional and the same length")
    n = x.size
    if n < 10:
        raise InsufficientDataError(f"need at least 10 points, got {n}")
    if not 0.0 < span <= 1.0:
        raise ValueError(f"span must lie in (0, 1], got {span}")

    window = max(3, min(n, int(math.ceil(span * n))))
    grid = np.linspace(float(x.min()), float(x.max()), grid_size)
    values = np.empty(grid_size)
    for g_idx, g in enumerate(grid):
        dist = np.abs(x - g)
        neighbor_idx = np.argpartition(dist, window - 1)[:window]
        local_dist = dist[neighbor_idx]
        dmax = local_dist.max()
        if dmax == 0.0:
            values[g_idx] = float(y[neighbor_idx].mean())
            continue
        u = np.minimum(local_dist / dmax, 1.0)
        w = (1.0 - u**3) ** 3
        sw = w.sum()
        if sw <= 0.0:
            values[g_idx] = float(y[neighbor_idx].mean())
            continue
        xc = x[neighbor_idx] - g
        yl = y[neighbor_idx]
        swx = float(w @ xc)
        swy = float(w @ yl)
        swxx = float(w @ (xc * xc))
        swxy = float(w @ (xc * yl))
        denom = sw * swxx - swx * swx
        if denom <= 1e-12 * sw * swxx or denom <= 0.0:
            values[g_idx] = swy / sw
            continue
        slope = (sw * swxy - swx * swy) / denom
        values[g_idx] = (swy - slope * swx) / sw  # local line evaluated at g
    return LoessCurve(grid=grid, values=values, span=span, window=window)


@dataclass(frozen=True)
class NonlinearityResult:
    """Deviation of the smoother from the straight-line fit.

    ``score`` is the maximum |smoother - line| over the central 95% of the
    predictor, divided by the sample SD of the response; it is invariant under
    affine changes of the response scale.
    """

    score: float
    flagged: bool
    slope: float
    intercept: float
    threshold: float


def nonlinearity_score(
    x, y, span: float = 0.75, flag_threshold: float = 0.1
) -> NonlinearityResult:
    """Quantify curvature of y(x) as smoother-vs-line deviation."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    curve = loess_smooth(x, y, span=span)
    line = ols(x, y)
    sd_y = float(y.std(ddof=1))
    lo, hi = np.percentile(x, [2.5, 97.5])
    mask = (curve.grid >= lo) & (curve.grid <= hi)
    if sd_y == 0.0:
        score = 0.0
    else:
        line_values = line.intercept + line.coef[0] * curve.grid[mask]
        score = float(np.max(np.abs(curve.values[mask] - line_values)) / sd_y)
    return NonlinearityResult(
        score=score,
        flagged=score > flag_threshold,
        slope=float(line.coef[0]),
        intercept=line.intercept,
        threshold=flag_threshold,
    )


@dataclass(frozen=True)
class PairLinearity:
    predictor: str
    response: str
    score: float
    flagged: bool


@dataclass(frozen=True)
class LinearityReport:
    pairs: tuple[PairLinearity, ...]
    span: float
    threshold: float

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["predictor", "response", "score", "flagged"])
        for pair in self.pairs:
            writer.writerow([pair.predictor, pair.response, f"{pair.score:.6f}", str(pair.flagged).lower()])
        return buffer.getvalue()


def linearity_report(
    data,
    pairs: Sequence[tuple[str, str]],
    span: float = 0.75,
    flag_threshold: float = 0.1,
) -> LinearityReport:
    """Nonlinearity scores for (predictor, response) column pairs."""
    names = sorted({name for pair in pairs for name in pair})
    arrays = _columns_from(data, names)
    results = []
    for predictor, response in pairs:
        a, b = arrays[predictor], arrays[response]
        mask = np.isfinite(a) & np.isfinite(b)
        result = nonlinearity_score(a[mask], b[mask], span=span, flag_threshold=flag_threshold)
        results.append(
            PairLinearity(predictor=predictor, response=response, score=result.score, flagged=result.flagged)
        )
    return LinearityReport(pairs=tuple(results), span=span, threshold=flag_threshold)
