"""Translation of SD-space cutoffs into source-measure units.

A cutoff of c SD for an index corresponds to ``beta0 + beta1 * c`` in the
source measure's own units; the signed slope carries the direction of
abnormality, so no case analysis is needed.  Display rounding follows each
measure's export precision (micrometers to integers, millimeters to two
decimals, and so on) so the rendered table is bit-comparable against the
published one; the underlying values are kept unrounded.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from .dataset import INDEX_DEFINITION_BY_NAME, IndexDefinition
from .normalization import NormalizationEstimate


def round_half_away(value: float, decimals: int) -> float:
    """Round half away from zero (the convention used in the published tables)."""
    factor = 10.0 ** decimals
    sign = -1.0 if value < 0 else 1.0
    return sign * math.floor(abs(value) * factor + 0.5) / factor


def to_source_units(est: NormalizationEstimate, sd_cutoff: float) -> float:
    """Source-measure value at ``sd_cutoff`` standard deviations toward disease."""
    if sd_cutoff < 0:
        raise ValueError(f"sd_cutoff must be nonnegative, got {sd_cutoff}")
    return est.beta0 + est.beta1 * sd_cutoff


@dataclass(frozen=True)
class CutoffRow:
    """One index's suspicious/abnormal cutoffs in source units (unrounded)."""

    index: str
    source_name: str
    units: str
    mean: float
    sd: float
    direction: str
    suspicious: float
    abnormal: float
    display_decimals: int = 2

    def __post_init__(self):
        # For increasing indices abnormal lies at or beyond suspicious, above
        # the mean; mirrored for decreasing.  Equality is allowed so that
        # degenerate (equal) thresholds remain representable.
        if self.direction == "Increasing":
            ordered = self.mean <= self.suspicious <= self.abnormal
        else:
            ordered = self.abnormal <= self.suspicious <= self.mean
        if not ordered:
            raise ValueError(f"cutoffs out of order for {self.index}")

    def display(self) -> dict[str, str]:
        def fmt(value: float) -> str:
            rounded = round_half_away(value, self.display_decimals)
            if self.display_decimals == 0:
                return str(int(rounded))
            return f"{rounded:.{self.display_decimals}f}"

        return {
            "index": self.index,
            "source_measure": self.source_name,
            "units": self.units,
            "mean": fmt(self.mean),
            "sd": fmt(self.sd),
            "direction": self.direction,
            "suspicious": fmt(self.suspicious),
            "abnormal": fmt(self.abnormal),
        }


def cutoff_table(
    estimates: Sequence[NormalizationEstimate] | Mapping[str, NormalizationEstimate],
    suspicious: float = 1.6,
    abnormal: float = 2.6,
    definitions: Optional[Mapping[str, IndexDefinition]] = None,
) -> list[CutoffRow]:
    """One cutoff row per estimate, ordered by index name.

    ``suspicious`` and ``abnormal`` are in SD units; ``abnormal`` must not be
    smaller than ``suspicious``.
    """
    if abnormal < suspicious:
        raise ValueError("abnormal threshold must be >= suspicious threshold")
    if isinstance(estimates, Mapping):
        estimates = [estimates[name] for name in sorted(estimates)]
    else:
        estimates = sorted(estimates, key=lambda e: e.index)
    definitions = definitions or INDEX_DEFINITION_BY_NAME

    rows = []
    for est in estimates:
        definition = definitions.get(est.index)
        rows.append(
            CutoffRow(
                index=est.index,
                source_name=definition.source_name if definition else est.index,
                units=definition.units if definition else "",
                mean=est.beta0,
                sd=est.sd,
                direction=est.direction,
                suspicious=to_source_units(est, suspicious),
                abnormal=to_source_units(est, abnormal),
                display_decimals=definition.display_decimals if definition else 2,
            )
        )
    return rows


def render_cutoff_csv(rows: Sequence[CutoffRow]) -> str:
    """CSV in the published column order, display-rounded."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["index", "source_measure", "units", "mean", "sd", "direction", "suspicious", "abnormal"])
    for row in rows:
        cells = row.display()
        writer.writerow([cells[key] for key in
                         ("index", "source_measure", "units", "mean", "sd", "direction", "suspicious", "abnormal")])
    return buffer.getvalue()
