"""Ordinary least squares for small design matrices.

Every linear fit in the package funnels through :func:`ols`, which solves the
problem through an orthogonal decomposition (SVD, via ``numpy.linalg.lstsq``)
instead of the normal equations.  The indices this package deals with are
highly collinear, so rank deficiency must be detected and reported rather than
silently absorbed into unstable coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InsufficientDataError, SingularDesignError

# Relative tolerance used when comparing singular values against the largest
# one to decide the numerical rank of the design matrix.
RANK_RTOL = 1e-10


@dataclass(frozen=True)
class OlsFit:
    """Result of an ordinary least squares fit with intercept."""

    coef: np.ndarray
    intercept: float
    r_squared: float
    adjusted_r_squared: float
    residuals: np.ndarray
    n: int

    def predict(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return self.intercept + x @ self.coef


def _suspect_columns(design: np.ndarray, names) -> list[str]:
    """Names of columns implicated in a rank deficiency.

    The right singular vectors attached to (numerically) zero singular values
    span the null space of the design; columns with large components in those
    vectors participate in the collinearity.
    """
    _, s, vt = np.linalg.svd(design, full_matrices=False)
    cutoff = s[0] * RANK_RTOL if s.size else 0.0
    suspects: set[int] = set()
    for k in range(len(s)):
        if s[k] <= cutoff:
            null_vec = np.abs(vt[k])
            for j in np.nonzero(null_vec > 0.1 * null_vec.max())[0]:
                if j > 0:  # column 0 is the intercept
                    suspects.add(j - 1)
    return [names[j] for j in sorted(suspects)]


def ols(x, y, *, column_names=None, allow_rank_deficient=False) -> OlsFit:
    """Least squares fit of ``y`` on the columns of ``x`` with an intercept.

    Parameters
    ----------
    x : array-like, shape (n, p) or (n,)
        Predictor columns, without an intercept column.
    y : array-like, shape (n,)
        Response.
    column_names : sequence of str, optional
        Used to name offending columns when the design is rank deficient.
    allow_rank_deficient : bool
        When True, a rank-deficient design returns the minimum-norm solution
        instead of raising.  The fitted values (and hence R^2) are still well
        defined in that case; only the individual coefficients are not.

    Raises
    ------
    InsufficientDataError
        If there are fewer rows than coefficients to estimate.
    SingularDesignError
        If the design is rank deficient and ``allow_rank_deficient`` is False.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    y = np.asarray(y, dtype=float)
    n, p = x.shape
    if y.shape != (n,):
        raise ValueError(f"x has {n} rows but y has shape {y.shape}")
    if n < p + 1:
        raise InsufficientDataError(f"{n} rows cannot support {p + 1} coefficients")

    names = list(column_names) if column_names is not None else [f"x{j}" for j in range(p)]
    design = np.column_stack([np.ones(n), x])
    solution, _, rank, _ = np.linalg.lstsq(design, y, rcond=RANK_RTOL)
    if rank < p + 1 and not allow_rank_deficient:
        suspects = _suspect_columns(design, names)
        raise SingularDesignError(
            "design matrix is rank deficient"
            + (f"; columns involved: {', '.join(suspects)}" if suspects else "")
        )

    fitted = design @ solution
    residuals = y - fitted
    ss_res = float(residuals @ residuals)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot > 0.0:
        r_squared = min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    else:
        # Constant response: a perfect fit of a constant, by convention.
        r_squared = 1.0 if ss_res <= 1e-30 else 0.0
    if n > p + 1:
        adjusted = 1.0 - (1.0 - r_squared) * (n - 1) / (n - p - 1)
    else:
        adjusted = float("nan")

    return OlsFit(
        coef=solution[1:],
        intercept=float(solution[0]),
        r_squared=r_squared,
        adjusted_r_squared=adjusted,
        residuals=residuals,
        n=n,
    )
