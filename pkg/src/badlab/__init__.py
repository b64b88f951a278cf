"""badlab: reconstruction and statistical audit of the BAD corneal model.

The Belin/Ambrósio Deviation model combines z-score normalized corneal
indices into a single screening score.  This package recovers the
normalization behind each index from exam data, refits the regression,
quantifies multicollinearity and nonlinearity among the indices, translates
SD-space thresholds into physical units, and verifies every recovery pipeline
against synthetic populations with known ground truth.
"""

from .badfit import BadFit, art, fit_bad, mean_shift_decomposition, predict_dfinal, published_fit, sd_final
from .dataset import (
    CANONICAL_FIELDS,
    DEFAULT_INDEX_DEFINITIONS,
    ColumnMapping,
    ExamDataset,
    ExamRecord,
    IndexDefinition,
    filter_ok,
    parse_exam_table,
    select_one_eye_per_patient,
    summarize,
    write_canonical_csv,
)
from .diagnostics import (
    CorrelationMatrix,
    VifReport,
    correlation_matrix,
    loess_smooth,
    nonlinearity_score,
    vif,
    vif_from_correlation,
)
from .distributions import (
    CategoryBreakdown,
    DensityCurve,
    category_breakdown,
    kde,
    mode_estimate,
    standard_normal_targets,
)
# The logistic *function* stays namespaced (badlab.logistic.logistic) so the
# module attribute is not shadowed.
from .logistic import baseline_probability, logit, logit_linearity_report
from .meta import StudySummary, convert_study_units, load_bundled_studies, study_table, welch_t
from .normalization import (
    NormalizationEstimate,
    NormalizationSuite,
    empirical_anchor_check,
    fit_all_indices,
    fit_index_normalization,
    proxy_delta_radius,
    reconstruct_index,
    reference_estimates,
)
from .synthetic import (
    PopulationSpec,
    RoundtripTolerances,
    default_population_spec,
    make_population,
    recovery_roundtrip,
)
from .thresholds import CutoffRow, cutoff_table, render_cutoff_csv, to_source_units

__version__ = "0.1.0"

__all__ = [
    "BadFit",
    "CANONICAL_FIELDS",
    "CategoryBreakdown",
    "ColumnMapping",
    "CorrelationMatrix",
    "CutoffRow",
    "DEFAULT_INDEX_DEFINITIONS",
    "DensityCurve",
    "ExamDataset",
    "ExamRecord",
    "IndexDefinition",
    "NormalizationEstimate",
    "NormalizationSuite",
    "PopulationSpec",
    "RoundtripTolerances",
    "StudySummary",
    "VifReport",
    "art",
    "baseline_probability",
    "category_breakdown",
    "convert_study_units",
    "correlation_matrix",
    "cutoff_table",
    "default_population_spec",
    "empirical_anchor_check",
    "filter_ok",
    "fit_all_indices",
    "fit_bad",
    "fit_index_normalization",
    "kde",
    "load_bundled_studies",
    "loess_smooth",
    "logit",
    "logit_linearity_report",
    "make_population",
    "mean_shift_decomposition",
    "mode_estimate",
    "nonlinearity_score",
    "parse_exam_table",
    "predict_dfinal",
    "proxy_delta_radius",
    "published_fit",
    "recovery_roundtrip",
    "reconstruct_index",
    "reference_estimates",
    "render_cutoff_csv",
    "sd_final",
    "select_one_eye_per_patient",
    "standard_normal_targets",
    "study_table",
    "summarize",
    "to_source_units",
    "vif",
    "vif_from_correlation",
    "welch_t",
    "write_canonical_csv",
]
