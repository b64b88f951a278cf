"""Recovery of each D index's z-score normalization from paired data.

Each D index is a z-score of a physical source measure, oriented so that
positive values point toward disease.  Rewriting the z-score as a linear
equation, the source measure is an affine function of the index: intercept =
population mean, slope = signed standard deviation.  Regressing observed
source measures on observed index values therefore recovers the normalization
parameters, including the direction of abnormality (the sign of the slope).
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import published
from .dataset import DEFAULT_INDEX_DEFINITIONS, ExamDataset, IndexDefinition
from .errors import BadlabError, InsufficientDataError, SingularDesignError
from .regression import ols

INCREASING = published.INCREASING
DECREASING = published.DECREASING


@dataclass(frozen=True)
class NormalizationEstimate:
    """Recovered normalization of one D index.

    ``beta0`` is the source-measure mean, ``beta1`` the signed slope in source
    units per SD (negative when the measure decreases toward disease), and
    ``sd`` its absolute value.  ``residual_sd`` is the residual standard error
    of the recovery fit, in source units.
    """

    index: str
    beta0: float
    beta1: float
    sd: float
    direction: str
    r_squared: float
    residual_sd: float
    n: int
    provenance: str = ""

    def __post_init__(self):
        if self.sd <= 0:
            raise ValueError("sd must be positive")
        if not math.isclose(self.sd, abs(self.beta1), rel_tol=1e-12):
            raise ValueError("sd must equal |beta1|")
        if not -1e-9 <= self.r_squared <= 1 + 1e-9:
            raise ValueError("r_squared must lie in [0, 1]")
        expected = DECREASING if self.beta1 < 0 else INCREASING
        if self.direction != expected:
            raise ValueError(f"direction {self.direction!r} inconsistent with slope {self.beta1}")

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "beta0": self.beta0,
            "beta1": self.beta1,
            "sd": self.sd,
            "direction": self.direction,
            "r_squared": self.r_squared,
            "residual_sd": self.residual_sd,
            "n": self.n,
            "provenance": self.provenance,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "NormalizationEstimate":
        return cls(
            index=raw["index"],
            beta0=float(raw["beta0"]),
            beta1=float(raw["beta1"]),
            sd=float(raw.get("sd", abs(float(raw["beta1"])))),
            direction=raw.get("direction", DECREASING if float(raw["beta1"]) < 0 else INCREASING),
            r_squared=float(raw.get("r_squared", 1.0)),
            residual_sd=float(raw.get("residual_sd", 0.0)),
            n=int(raw.get("n", 0)),
            provenance=raw.get("provenance", ""),
        )


def reference_estimates() -> dict[str, NormalizationEstimate]:
    """The bundled published normalization parameters, as estimates."""
    out = {}
    for index, entry in published.REFERENCE_NORMALIZATION.items():
        beta1 = entry["beta1"]
        out[index] = NormalizationEstimate(
            index=index,
            beta0=entry["beta0"],
            beta1=beta1,
            sd=abs(beta1),
            direction=DECREASING if beta1 < 0 else INCREASING,
            r_squared=1.0,
            residual_sd=0.0,
            n=0,
            provenance="published reference values",
        )
    return out


def fit_index_normalization(
    pairs: Sequence[tuple[float, float]],
    index: str = "",
    provenance: str = "",
) -> NormalizationEstimate:
    """Recover (mean, SD, direction) from ``(source measure, index)`` pairs.

    Ordinary least squares of the source measure on the index value.  At
    least 3 pairs are required, and the index values must vary.
    """
    pairs = list(pairs)
    if len(pairs) < 3:
        raise InsufficientDataError(f"need at least 3 pairs, got {len(pairs)}")
    x = np.array([p[0] for p in pairs], dtype=float)
    d = np.array([p[1] for p in pairs], dtype=float)
    if np.ptp(d) == 0.0:
        raise SingularDesignError("index values are constant; normalization is unidentifiable")

    fit = ols(d, x, column_names=[index or "d"])
    beta1 = float(fit.coef[0])
    if beta1 == 0.0:
        raise SingularDesignError("source measure does not vary with the index (zero slope)")
    n = len(pairs)
    residual_sd = float(np.sqrt(fit.residuals @ fit.residuals / (n - 2))) if n > 2 else 0.0
    return NormalizationEstimate(
        index=index,
        beta0=fit.intercept,
        beta1=beta1,
        sd=abs(beta1),
        direction=DECREASING if beta1 < 0 else INCREASING,
        r_squared=min(1.0, max(0.0, fit.r_squared)),
        residual_sd=residual_sd,
        n=n,
        provenance=provenance,
    )


def reconstruct_index(x: float, est: NormalizationEstimate) -> float:
    """Map a source measure back to SD units: ``(x - beta0) / beta1``.

    The signed slope makes positive output point toward disease for both
    directions of abnormality.
    """
    return (x - est.beta0) / est.beta1


def proxy_delta_radius(bfs_r: float, ebfs_r: float) -> float:
    """Absolute change in best-fit-sphere radius, in millimeters.

    Serves as the source measure for the elevation-change indices, whose true
    inputs are not exported by the device.  Radii are exported at 0.01 mm
    grain, so this proxy carries up to 10 µm of quantization loss.
    """
    if bfs_r <= 0 or ebfs_r <= 0:
        raise ValueError(f"radii must be positive, got ({bfs_r}, {ebfs_r})")
    return abs(ebfs_r - bfs_r)


@dataclass(frozen=True)
class AnchorReport:
    """Empirical cross-check of a normalization estimate.

    Exams with index values near 0 pin the mean; exams near 1 pin the SD (as
    the absolute delta between the two groups).  ``consistent`` is None when
    either anchor window is empty.
    """

    index: str
    d0_range: Optional[tuple[float, float]]
    d1_range: Optional[tuple[float, float]]
    delta_range: Optional[tuple[float, float]]
    direction: Optional[str]
    consistent: Optional[bool]
    n0: int
    n1: int


def empirical_anchor_check(
    ds: ExamDataset,
    definition: IndexDefinition,
    window: float = 0.005,
    est: Optional[NormalizationEstimate] = None,
) -> AnchorReport:
    """Compare a fitted estimate against exams observed at D = 0 and D = 1.

    ``window`` is the half-width (in SD) of the anchor windows; exported index
    values are rounded, so exact-zero matches are not expected.  When ``est``
    is omitted it is fitted from the same dataset.
    """
    xs, ds_vals = [], []
    for record in ds.records:
        source = definition.source_value(record)
        d = getattr(record, definition.index)
        if source is None or d is None:
            continue
        xs.append(source)
        ds_vals.append(d)
    x = np.array(xs, dtype=float)
    d = np.array(ds_vals, dtype=float)

    if est is None:
        est = fit_index_normalization(list(zip(x, d)), index=definition.index)

    mask0 = np.abs(d) <= window
    mask1 = np.abs(d - 1.0) <= window
    d0_range = (float(x[mask0].min()), float(x[mask0].max())) if mask0.any() else None
    d1_range = (float(x[mask1].min()), float(x[mask1].max())) if mask1.any() else None

    delta_range = None
    direction = None
    consistent: Optional[bool] = None
    if d0_range and d1_range:
        deltas = [abs(a - b) for a in d0_range for b in d1_range]
        delta_range = (min(deltas), max(deltas))
        mid0 = 0.5 * (d0_range[0] + d0_range[1])
        mid1 = 0.5 * (d1_range[0] + d1_range[1])
        direction = DECREASING if mid1 < mid0 else INCREASING
        # The anchor windows admit |window| SD of slack on each side.
        slack = window * est.sd + 1e-9 * max(1.0, abs(est.beta0))
        consistent = (
            d0_range[0] - slack <= est.beta0 <= d0_range[1] + slack
            and delta_range[0] - 2 * slack <= est.sd <= delta_range[1] + 2 * slack
            and direction == est.direction
        )
    return AnchorReport(
        index=definition.index,
        d0_range=d0_range,
        d1_range=d1_range,
        delta_range=delta_range,
        direction=direction,
        consistent=consistent,
        n0=int(mask0.sum()),
        n1=int(mask1.sum()),
    )


@dataclass(frozen=True)
class NormalizationSuite:
    """Per-index estimates plus per-index failures from a bulk fit."""

    estimates: dict[str, NormalizationEstimate]
    failures: dict[str, str] = field(default_factory=dict)

    def to_json(self) -> str:
        body = {
            "estimates": {name: est.to_dict() for name, est in sorted(self.estimates.items())},
            "failures": dict(sorted(self.failures.items())),
        }
        return json.dumps(body, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "NormalizationSuite":
        raw = json.loads(text)
        if "estimates" not in raw:  # bare {index: estimate} form
            raw = {"estimates": raw, "failures": {}}
        estimates = {
            name: NormalizationEstimate.from_dict({"index": name, **entry})
            for name, entry in raw["estimates"].items()
        }
        return cls(estimates=estimates, failures=dict(raw.get("failures", {})))

    def to_csv(self, definitions=DEFAULT_INDEX_DEFINITIONS) -> str:
        """Mean/SD table in the conventional published layout."""
        by_name = {d.index: d for d in definitions}
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["index", "source_measure", "units", "mean", "sd", "direction", "r_squared", "n"])
        for name in sorted(self.estimates):
            est = self.estimates[name]
            definition = by_name.get(name)
            writer.writerow(
                [
                    name,
                    definition.source_name if definition else "",
                    definition.units if definition else "",
                    repr(est.beta0),
                    repr(est.sd),
                    est.direction,
                    repr(est.r_squared),
                    est.n,
                ]
            )
        return buffer.getvalue()


def fit_all_indices(
    ds: ExamDataset,
    definitions: Sequence[IndexDefinition] = DEFAULT_INDEX_DEFINITIONS,
) -> NormalizationSuite:
    """Fit every index's normalization; failures are per-index, not global.

    Rows missing either the source measure or the index value are dropped per
    index.
    """
    estimates: dict[str, NormalizationEstimate] = {}
    failures: dict[str, str] = {}
    for definition in definitions:
        pairs = []
        for record in ds.records:
            source = definition.source_value(record)
            d = getattr(record, definition.index)
            if source is not None and d is not None:
                pairs.append((source, d))
        try:
            estimates[definition.index] = fit_index_normalization(
                pairs, index=definition.index, provenance=ds.provenance
            )
        except (BadlabError, ValueError) as exc:
            failures[definition.index] = str(exc)
    return NormalizationSuite(estimates=estimates, failures=failures)
