"""Comparison of published study statistics.

Published normal-group statistics for the model output and its indices are
bundled as fixtures (per-study mean/SD/median/range with citation keys).
Group means are compared with Welch's t-test computed from summary moments;
values published in source-measure units are converted to SD units by the
affine normalization map.  Interquartile ranges are converted affinely like
any other range, never reinterpreted through a distributional assumption.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, replace
from importlib import resources
from typing import Mapping, Optional, Sequence

from .errors import InsufficientDataError
from .normalization import NormalizationEstimate
from .special import student_t_cdf

UNITS_SD = "SDUnits"
UNITS_SOURCE = "SourceUnits"
RANGE_MINMAX = "MinMax"
RANGE_IQR = "IQR"


@dataclass(frozen=True)
class StudySummary:
    """Summary statistics one study reported for one quantity."""

    study_id: str
    quantity: str
    n: int
    mean: Optional[float] = None
    sd: Optional[float] = None
    median: Optional[float] = None
    range_low: Optional[float] = None
    range_high: Optional[float] = None
    range_kind: str = RANGE_MINMAX
    units: str = UNITS_SD
    note: str = ""

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("group size must be at least 1")
        if self.units not in (UNITS_SD, UNITS_SOURCE):
            raise ValueError(f"unknown units {self.units!r}")
        if self.range_kind not in (RANGE_MINMAX, RANGE_IQR):
            raise ValueError(f"unknown range kind {self.range_kind!r}")

    def to_dict(self) -> dict:
        out: dict[str, object] = {"study_id": self.study_id, "quantity": self.quantity, "n": self.n}
        for name in ("mean", "sd", "median", "range_low", "range_high"):
            value = getattr(self, name)
            if value is not None:
                out[name] = value
        if self.range_kind != RANGE_MINMAX:
            out["range_kind"] = self.range_kind
        if self.units != UNITS_SD:
            out["units"] = self.units
        if self.note:
            out["note"] = self.note
        return out

    @classmethod
    def from_dict(cls, raw: dict) -> "StudySummary":
        return cls(
            study_id=raw["study_id"],
            quantity=raw["quantity"],
            n=int(raw["n"]),
            mean=None if raw.get("mean") is None else float(raw["mean"]),
            sd=None if raw.get("sd") is None else float(raw["sd"]),
            median=None if raw.get("median") is None else float(raw["median"]),
            range_low=None if raw.get("range_low") is None else float(raw["range_low"]),
            range_high=None if raw.get("range_high") is None else float(raw["range_high"]),
            range_kind=raw.get("range_kind", RANGE_MINMAX),
            units=raw.get("units", UNITS_SD),
            note=raw.get("note", ""),
        )


@dataclass(frozen=True)
class WelchResult:
    t: float
    df: float
    p: float


def welch_from_moments(
    mean_a: float, sd_a: float, n_a: int, mean_b: float, sd_b: float, n_b: int
) -> WelchResult:
    """Welch's t-test from group means, SDs, and sizes (two-sided p)."""
    if min(n_a, n_b) < 2:
        raise InsufficientDataError("each group needs at least 2 observations")
    var_a = sd_a * sd_a / n_a
    var_b = sd_b * sd_b / n_b
    se = math.sqrt(var_a + var_b)
    if se == 0.0:
        return WelchResult(t=0.0, df=float(n_a + n_b - 2), p=1.0)
    t = (mean_a - mean_b) / se
    df = (var_a + var_b) ** 2 / (var_a**2 / (n_a - 1) + var_b**2 / (n_b - 1))
    p = 2.0 * (1.0 - student_t_cdf(abs(t), df))
    return WelchResult(t=t, df=df, p=min(1.0, max(0.0, p)))


def welch_t(a: StudySummary, b: StudySummary) -> WelchResult:
    """Welch's t-test between two study summaries of the same quantity."""
    if a.quantity != b.quantity:
        raise ValueError(f"quantities differ: {a.quantity} vs {b.quantity}")
    if a.units != b.units:
        raise ValueError(f"units differ: {a.units} vs {b.units}")
    for s in (a, b):
        if s.mean is None or s.sd is None:
            raise InsufficientDataError(f"{s.study_id} lacks a mean or SD")
    return welch_from_moments(a.mean, a.sd, a.n, b.mean, b.sd, b.n)


def convert_study_units(s: StudySummary, est: NormalizationEstimate) -> StudySummary:
    """Convert a source-unit summary into SD units via the normalization map.

    Means and medians map through ``(x - beta0) / beta1``; SDs scale by
    ``1 / |beta1|``; range endpoints map endpoint-wise and swap order when the
    slope is negative, so converted ranges always read low-to-high.
    """
    if s.units != UNITS_SOURCE:
        raise ValueError(f"{s.study_id} is not in source units")
    if est.index != s.quantity:
        raise ValueError(f"estimate is for {est.index}, summary is for {s.quantity}")

    def affine(x: Optional[float]) -> Optional[float]:
        return None if x is None else (x - est.beta0) / est.beta1

    low, high = affine(s.range_low), affine(s.range_high)
    if low is not None and high is not None and low > high:
        low, high = high, low
    note = (s.note + "; " if s.note else "") + "converted from source units"
    return replace(
        s,
        mean=affine(s.mean),
        sd=None if s.sd is None else s.sd / est.sd,
        median=affine(s.median),
        range_low=low,
        range_high=high,
        units=UNITS_SD,
        note=note,
    )


def load_bundled_studies() -> list[StudySummary]:
    """The study fixtures shipped with the package."""
    text = resources.files("badlab").joinpath("data/published_studies.json").read_text("utf-8")
    raw = json.loads(text)
    return [StudySummary.from_dict(entry) for entry in raw["studies"]]


@dataclass(frozen=True)
class StudyTableReport:
    """Normalized study rows plus the pairwise comparison matrix."""

    rows: tuple[StudySummary, ...]
    unconvertible: tuple[str, ...]
    welch: tuple[tuple[str, str, WelchResult], ...]

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(
            ["study_id", "quantity", "n", "mean", "sd", "median",
             "range_low", "range_high", "range_kind", "units", "note"]
        )

        def fmt(v):
            return "" if v is None else f"{v:.4f}"

        for row in self.rows:
            writer.writerow(
                [row.study_id, row.quantity, row.n, fmt(row.mean), fmt(row.sd), fmt(row.median),
                 fmt(row.range_low), fmt(row.range_high), row.range_kind, row.units, row.note]
            )
        return buffer.getvalue()

    def welch_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["study_a", "study_b", "t", "df", "p", "significant_0.05"])
        for id_a, id_b, result in self.welch:
            writer.writerow(
                [id_a, id_b, f"{result.t:.4f}", f"{result.df:.1f}",
                 f"{result.p:.3e}", str(result.p < 0.05).lower()]
            )
        return buffer.getvalue()

    def to_markdown(self) -> str:
        lines = [
            "| study | quantity | n | mean | sd | median | range | units |",
            "| --- | --- | --- | --- | --- | --- | --- | --- |",
        ]

        def fmt(v):
            return "" if v is None else f"{v:.2f}"

        for row in self.rows:
            span = ""
            if row.range_low is not None and row.range_high is not None:
                kind = " (IQR)" if row.range_kind == RANGE_IQR else ""
                span = f"({fmt(row.range_low)}, {fmt(row.range_high)}){kind}"
            lines.append(
                f"| {row.study_id} | {row.quantity} | {row.n} | {fmt(row.mean)} | {fmt(row.sd)} "
                f"| {fmt(row.median)} | {span} | {row.units} |"
            )
        return "\n".join(lines) + "\n"


def study_table(
    studies: Sequence[StudySummary],
    estimates: Optional[Mapping[str, NormalizationEstimate]] = None,
) -> StudyTableReport:
    """Normalize studies to SD units and compare the d_final groups pairwise.

    Source-unit rows without a matching normalization estimate are flagged as
    unconvertible and passed through untouched.
    """
    estimates = estimates or {}
    rows: list[StudySummary] = []
    unconvertible: list[str] = []
    for study in studies:
        if study.units == UNITS_SOURCE:
            est = estimates.get(study.quantity)
            if est is None:
                unconvertible.append(f"{study.study_id}:{study.quantity}")
                rows.append(study)
                continue
            rows.append(convert_study_units(study, est))
        else:
            rows.append(study)

    comparable = [
        r for r in rows
        if r.quantity == "d_final" and r.units == UNITS_SD and r.mean is not None and r.sd is not None
    ]
    welch: list[tuple[str, str, WelchResult]] = []
    for i in range(len(comparable)):
        for j in range(i + 1, len(comparable)):
            a, b = comparable[i], comparable[j]
            welch.append((a.study_id, b.study_id, welch_t(a, b)))
    return StudyTableReport(rows=tuple(rows), unconvertible=tuple(unconvertible), welch=tuple(welch))
