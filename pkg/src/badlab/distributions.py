"""Density estimation, mode location, and category breakdowns.

The D indices are nominally standard normal in a normal population, so their
empirical densities can be compared directly against the standard normal
curve.  The mode (taken as the argmax of a kernel density estimate) is used to
quantify distribution shift because it resists skew better than the mean or
median.  Categories are one-sided: the indices are oriented toward disease, so
raw values are compared against the cutoffs, not absolute values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDistributionError, InsufficientDataError
from .special import normal_cdf

_SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class DensityCurve:
    """Kernel density estimate on a fixed grid."""

    grid: np.ndarray
    density: np.ndarray
    bandwidth: float
    n: int

    def __post_init__(self):
        if np.any(self.density < 0):
            raise ValueError("density must be nonnegative")
        integral = self.integral()
        if not 0.99 <= integral <= 1.01:
            raise ValueError(f"density integral {integral:.4f} outside [0.99, 1.01]")

    def integral(self) -> float:
        return float(np.trapezoid(self.density, self.grid))

    def mode(self) -> float:
        # argmax returns the first maximum, i.e. ties break toward the
        # smallest grid value.
        return float(self.grid[int(np.argmax(self.density))])

    def local_maxima(self, min_height_fraction: float = 0.01) -> list[float]:
        """Grid locations of interior local maxima above a height floor."""
        d = self.density
        floor = min_height_fraction * d.max()
        peaks = []
        for i in range(1, len(d) - 1):
            if d[i] >= floor and d[i] > d[i - 1] and d[i] >= d[i + 1]:
                peaks.append(float(self.grid[i]))
        return peaks


def silverman_bandwidth(values: np.ndarray) -> float:
    """0.9 * min(SD, IQR / 1.34) * n^(-1/5)."""
    sd = float(values.std(ddof=1))
    q75, q25 = np.percentile(values, [75, 25])
    iqr = float(q75 - q25)
    scale = min(sd, iqr / 1.34) if iqr > 0 else sd
    if scale <= 0:
        raise DegenerateDistributionError("sample has zero spread")
    return 0.9 * scale * values.size ** (-0.2)


def kde(values, bandwidth: float | None = None, grid_size: int = 512) -> DensityCurve:
    """Gaussian-kernel density estimate.

    The grid spans [min - 3h, max + 3h] with ``grid_size`` points.  When
    ``bandwidth`` is omitted, Silverman's rule is used.  Evaluation is chunked
    over the sample so memory stays bounded for large inputs.
    """
    values = np.asarray(values, dtype=float)
    if values.ndim != 1:
        raise ValueError("values must be one-dimensional")
    if values.size < 10:
        raise InsufficientDataError(f"need at least 10 values, got {values.size}")
    if np.ptp(values) == 0.0:
        raise DegenerateDistributionError("all values are equal")
    h = float(bandwidth) if bandwidth is not None else silverman_bandwidth(values)
    if h <= 0:
        raise ValueError("bandwidth must be positive")

    grid = np.linspace(values.min() - 3 * h, values.max() + 3 * h, grid_size)
    density = np.zeros(grid_size)
    chunk = 4096
    for start in range(0, values.size, chunk):
        block = values[start : start + chunk]
        z = (grid[:, None] - block[None, :]) / h
        density += np.exp(-0.5 * z * z).sum(axis=1)
    density /= values.size * h * _SQRT_2PI
    return DensityCurve(grid=grid, density=density, bandwidth=h, n=int(values.size))


def mode_estimate(values, bandwidth: float | None = None) -> float:
    """Location of the KDE maximum."""
    return kde(values, bandwidth=bandwidth).mode()


@dataclass(frozen=True)
class CategoryBreakdown:
    """Shares of the normal / suspicious / abnormal categories."""

    normal: float
    suspicious: float
    abnormal: float
    thresholds: tuple[float, float] = (1.6, 2.6)

    def __post_init__(self):
        for share in (self.normal, self.suspicious, self.abnormal):
            if not -1e-9 <= share <= 1 + 1e-9:
                raise ValueError(f"share {share} outside [0, 1]")
        total = self.normal + self.suspicious + self.abnormal
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"shares must sum to 1, got {total}")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.normal, self.suspicious, self.abnormal)


def category_breakdown(values, suspicious: float = 1.6, abnormal: float = 2.6) -> CategoryBreakdown:
    """Fractions below / between / beyond the one-sided cutoffs."""
    if not 0 < suspicious < abnormal:
        raise ValueError(f"need 0 < suspicious < abnormal, got ({suspicious}, {abnormal})")
    values = np.asarray(values, dtype=float)
    values = values[np.isfinite(values)]
    if values.size == 0:
        raise InsufficientDataError("no finite values")
    n = values.size
    n_abnormal = int(np.count_nonzero(values >= abnormal))
    n_suspicious = int(np.count_nonzero(values >= suspicious)) - n_abnormal
    n_normal = n - n_suspicious - n_abnormal
    return CategoryBreakdown(
        normal=n_normal / n,
        suspicious=n_suspicious / n,
        abnormal=n_abnormal / n,
        thresholds=(suspicious, abnormal),
    )


def standard_normal_targets(suspicious: float = 1.6, abnormal: float = 2.6) -> CategoryBreakdown:
    """Analytic category shares for a standard normal variable.

    The abnormal share at the conventional cutoffs is 0.466%, which is often
    quoted rounded down to 0.4%.
    """
    if not suspicious < abnormal:
        raise ValueError(f"need suspicious < abnormal, got ({suspicious}, {abnormal})")
    phi_s = normal_cdf(suspicious)
    phi_a = 1.0 if math.isinf(abnormal) else normal_cdf(abnormal)
    return CategoryBreakdown(
        normal=phi_s,
        suspicious=phi_a - phi_s,
        abnormal=1.0 - phi_a,
        thresholds=(suspicious, abnormal),
    )
