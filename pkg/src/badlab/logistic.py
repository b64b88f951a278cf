"""The logistic-regression lens on the model output.

If the model output is read as the logit of a class probability, the logistic
of the intercept gives the baseline probability when every index sits at its
normative mean.  Whether the model was actually built by logistic regression
is not confirmable from public information, so everything in this module is an
interpretation layer, not an asserted property of the model.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .badfit import BadFit
from .dataset import ExamDataset
from .diagnostics import nonlinearity_score
from .regression import ols


def logit(p: float) -> float:
    """ln(p / (1 - p)) for p strictly inside (0, 1)."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie strictly in (0, 1), got {p}")
    return math.log(p / (1.0 - p))


def logistic(x: float) -> float:
    """1 / (1 + e^(-x)), branch-stable for |x| up to 700."""
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def baseline_probability(fit: BadFit) -> float:
    """Probability implied by the intercept when all indices are at the mean."""
    return logistic(fit.intercept_c)


@dataclass(frozen=True)
class IndexLogitDiagnostics:
    """Linearity-in-the-logit diagnostics for one index."""

    index: str
    slope: float
    intercept: float
    standardized_slope: float
    nonlinearity: float
    curvature_flag: bool
    flat_slope_flag: bool


@dataclass(frozen=True)
class LogitLinearityReport:
    entries: tuple[IndexLogitDiagnostics, ...]
    span: float
    flat_threshold: float

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(
            ["index", "slope", "intercept", "standardized_slope", "nonlinearity", "curvature", "flat_slope"]
        )
        for e in self.entries:
            writer.writerow(
                [
                    e.index,
                    f"{e.slope:.6f}",
                    f"{e.intercept:.6f}",
                    f"{e.standardized_slope:.6f}",
                    f"{e.nonlinearity:.6f}",
                    str(e.curvature_flag).lower(),
                    str(e.flat_slope_flag).lower(),
                ]
            )
        return buffer.getvalue()


def logit_linearity_report(
    ds: ExamDataset,
    fit: BadFit,
    span: float = 0.75,
    flat_slope_threshold: float = 0.05,
    curvature_threshold: float = 0.1,
) -> LogitLinearityReport:
    """Per-index linearity of the response against each index.

    The model output is treated as already being on the logit scale (the
    probability reading applies the logistic to it directly), so the response
    here is d_final itself.  Flags: ``curvature`` when the smoother deviates
    from the line by more than ``curvature_threshold`` response-SDs, and
    ``flat_slope`` when the standardized slope (the correlation) is smaller
    than ``flat_slope_threshold`` in magnitude.
    """
    response = ds.column("d_final")
    entries = []
    for index in sorted(fit.weights):
        predictor = ds.column(index)
        mask = np.isfinite(predictor) & np.isfinite(response)
        x, y = predictor[mask], response[mask]
        line = ols(x, y)
        sd_x, sd_y = float(x.std(ddof=1)), float(y.std(ddof=1))
        standardized = float(line.coef[0]) * sd_x / sd_y if sd_y > 0 else 0.0
        curvature = nonlinearity_score(x, y, span=span, flag_threshold=curvature_threshold)
        entries.append(
            IndexLogitDiagnostics(
                index=index,
                slope=float(line.coef[0]),
                intercept=line.intercept,
                standardized_slope=standardized,
                nonlinearity=curvature.score,
                curvature_flag=curvature.flagged,
                flat_slope_flag=abs(standardized) < flat_slope_threshold,
            )
        )
    return LogitLinearityReport(entries=tuple(entries), span=span, flat_threshold=flat_slope_threshold)
