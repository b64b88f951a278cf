"""Published reference values for the Belin/Ambrósio Deviation (BAD) model.

The BAD model combines nine z-score normalized corneal indices into a single
screening score.  The constants below collect the model parameters and
normal-population statistics that have appeared in print: the regression
weights and intercept, the per-index normalization parameters (mean and SD of
each source measure, with the direction of abnormality), and reported modes,
category shares, pairwise correlations, and variance inflation factors for a
large normal-eye sample.

Normalization parameters are stored with one more digit than the commonly
printed values.  The extra digit is constrained so that (a) rounding to the
printed precision reproduces the published mean/SD exactly and (b) the derived
suspicious/abnormal cutoff table reproduces the published figures after
display rounding.  The printed values alone cannot do (b): for example
614 - 2.6 * 133 = 268.2, while the published abnormal cutoff for the average
Ambrosio Relational Thickness is 269.
"""

from __future__ import annotations

# The nine indices that enter the regression equation.  d_r is exported by the
# device but carries no weight in the published model.
MODEL_INDICES = ("d_aa", "d_am", "d_b", "d_e", "d_f", "d_k", "d_p", "d_t", "d_y")
ALL_INDICES = ("d_aa", "d_am", "d_b", "d_e", "d_f", "d_k", "d_p", "d_r", "d_t", "d_y")

INCREASING = "Increasing"
DECREASING = "Decreasing"

# Suspicious / abnormal cutoffs in SD units.  D_final uses a higher abnormal
# cutoff than the individual indices.
SUSPICIOUS_SD = 1.6
ABNORMAL_SD = 2.6
DFINAL_ABNORMAL_SD = 3.0

# Regression weights and intercept of the published model.
REGRESSION_WEIGHTS = {
    "d_aa": 0.133,
    "d_am": 0.132,
    "d_b": 0.140,
    "d_e": 0.158,
    "d_f": 0.154,
    "d_k": 0.132,
    "d_p": 0.166,
    "d_t": 0.168,
    "d_y": 0.132,
}
INTERCEPT_C = 0.640

# Per-index normalization: signed slope beta1 encodes the direction of
# abnormality (negative slope = source measure decreases toward disease).
# Keys: beta0, beta1 (source units), printed_mean, printed_sd (as published).
REFERENCE_NORMALIZATION = {
    "d_aa": {"beta0": 614.1, "beta1": -132.9, "printed_mean": 614.0, "printed_sd": 133.0},
    "d_am": {"beta0": 487.7, "beta1": -109.4, "printed_mean": 488.0, "printed_sd": 109.0},
    "d_b": {"beta0": 0.036, "beta1": 0.026, "printed_mean": 0.04, "printed_sd": 0.03},
    "d_e": {"beta0": 4.1, "beta1": 4.7, "printed_mean": 4.0, "printed_sd": 5.0},
    "d_f": {"beta0": 0.03, "beta1": 0.01, "printed_mean": 0.03, "printed_sd": 0.01},
    "d_k": {"beta0": 45.0, "beta1": 1.6, "printed_mean": 45.0, "printed_sd": 1.6},
    "d_p": {"beta0": 0.90, "beta1": 0.15, "printed_mean": 0.90, "printed_sd": 0.15},
    "d_r": {"beta0": -5.12, "beta1": -1.92, "printed_mean": -5.1, "printed_sd": 1.9},
    "d_t": {"beta0": 540.0, "beta1": -34.0, "printed_mean": 540.0, "printed_sd": 34.0},
    "d_y": {"beta0": -0.238, "beta1": -0.258, "printed_mean": -0.24, "printed_sd": 0.26},
}

# Published cutoff table in source units (suspicious at 1.6 SD, abnormal at
# 2.6 SD, both in the direction of abnormality), at printed precision.
PUBLISHED_CUTOFFS = {
    "d_aa": (401.0, 269.0),
    "d_am": (313.0, 203.0),
    "d_b": (0.08, 0.10),
    "d_e": (12.0, 16.0),
    "d_f": (0.05, 0.06),
    "d_k": (47.6, 49.2),
    "d_p": (1.14, 1.29),
    "d_r": (-8.2, -10.1),
    "d_t": (486.0, 452.0),
    "d_y": (-0.65, -0.91),
}

# Pairwise index correlations reported for a large normal-eye sample.  Only
# these five pairs have published values.
REPORTED_CORRELATIONS = {
    ("d_aa", "d_am"): 0.93,
    ("d_aa", "d_p"): 0.88,
    ("d_am", "d_p"): 0.82,
    ("d_aa", "d_t"): 0.71,
    ("d_am", "d_t"): 0.72,
}

# Reported variance inflation factors for the nine model indices.
REPORTED_VIF = {
    "d_aa": 14.182,
    "d_am": 9.762,
    "d_b": 2.933,
    "d_e": 3.11,
    "d_f": 1.651,
    "d_k": 1.215,
    "d_p": 6.542,
    "d_t": 2.607,
    "d_y": 1.154,
}

# Reported distribution modes, in SD units and in source units.
REPORTED_INDEX_MODES = {
    "d_aa": 0.78,
    "d_am": 0.89,
    "d_b": -0.16,
    "d_e": 0.07,
    "d_f": 0.26,
    "d_k": -0.21,
    "d_p": 0.76,
    "d_r": -0.93,
    "d_t": -0.27,
    "d_y": -0.05,
}
REPORTED_SOURCE_MODES = {
    "d_aa": 511.0,
    "d_am": 390.0,
    "d_b": 0.04,
    "d_e": 5.0,
    "d_f": 0.03,
    "d_k": 44.7,
    "d_p": 1.02,
    "d_r": -3.3,
    "d_t": 529.0,
    "d_y": -0.22,
}

# Reported normal / suspicious / abnormal shares (percent) per index for the
# same sample, alongside the nominal standard-normal targets.  The printed
# abnormal target is 0.4% although the analytic tail beyond 2.6 SD is 0.466%.
REPORTED_CATEGORY_TARGETS = (94.5, 5.0, 0.4)
REPORTED_CATEGORY_SHARES = {
    "d_aa": (90.9, 7.3, 1.8),
    "d_am": (91.5, 7.2, 1.3),
    "d_b": (89.0, 8.5, 2.5),
    "d_e": (90.1, 7.1, 2.8),
    "d_f": (87.1, 8.5, 4.4),
    "d_k": (93.8, 5.6, 0.7),
    "d_p": (73.4, 18.8, 7.8),
    "d_r": (95.6, 1.9, 5.2),
    "d_t": (92.9, 5.2, 1.9),
    "d_y": (93.4, 5.9, 0.6),
}
