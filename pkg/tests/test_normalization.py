import dataclasses

import numpy as np
import pytest
from hypothesis import given, strategies as st

from badlab import published
from badlab.dataset import DEFAULT_INDEX_DEFINITIONS, INDEX_DEFINITION_BY_NAME, ExamDataset, ExamRecord
from badlab.errors import InsufficientDataError, SingularDesignError
from badlab.normalization import (
    NormalizationSuite,
    empirical_anchor_check,
    fit_all_indices,
    fit_index_normalization,
    proxy_delta_radius,
    reconstruct_index,
    reference_estimates,
)
from badlab.synthetic import default_population_spec, make_population


def exact_linear_dataset(d_grid):
    """Every index shares the d value; every source measure is beta0 + beta1*d.

    The grid must stay above -1.38: beyond that the back-radius delta would
    cross zero and its magnitude read-back would no longer be linear.
    """
    records = []
    for i, d in enumerate(d_grid):
        kwargs = {"patient_id": f"p{i:04d}", "eye": "L"}
        for index, entry in published.REFERENCE_NORMALIZATION.items():
            kwargs[index] = float(d)
            source = entry["beta0"] + entry["beta1"] * float(d)
            definition = INDEX_DEFINITION_BY_NAME[index]
            if len(definition.source_columns) == 2:
                base, enhanced = definition.source_columns
                kwargs[base] = 7.0
                kwargs[enhanced] = 7.0 + source
            else:
                kwargs[definition.source_columns[0]] = source
        records.append(ExamRecord(**kwargs))
    return ExamDataset(records=tuple(records))


class TestFitIndexNormalization:
    def test_three_point_collinear_recovery(self):
        # Anchored at the published ART-average values: mean 614, SD 133,
        # decreasing toward disease.
        est = fit_index_normalization([(614.0, 0.0), (481.0, 1.0), (747.0, -1.0)], index="d_aa")
        assert est.beta0 == pytest.approx(614.0, abs=1e-12)
        assert est.beta1 == pytest.approx(-133.0, abs=1e-12)
        assert est.sd == pytest.approx(133.0, abs=1e-12)
        assert est.direction == "Decreasing"
        assert est.r_squared == pytest.approx(1.0, abs=1e-12)

    def test_increasing_direction_recovery(self):
        est = fit_index_normalization([(45.0, 0.0), (46.6, 1.0), (43.4, -1.0)], index="d_k")
        assert est.beta0 == pytest.approx(45.0, abs=1e-12)
        assert est.beta1 == pytest.approx(1.6, abs=1e-12)
        assert est.direction == "Increasing"

    def test_constant_index_is_singular(self):
        with pytest.raises(SingularDesignError):
            fit_index_normalization([(614.0, 1.0), (613.0, 1.0), (615.0, 1.0)])

    def test_too_few_pairs(self):
        with pytest.raises(InsufficientDataError):
            fit_index_normalization([(614.0, 0.0), (481.0, 1.0)])

    def test_noisy_fit_reports_residual_sd(self):
        rng = np.random.default_rng(0)
        d = rng.standard_normal(500)
        x = 540.0 - 34.0 * d + rng.normal(0.0, 5.0, 500)
        est = fit_index_normalization(list(zip(x, d)), index="d_t")
        assert est.beta0 == pytest.approx(540.0, rel=0.01)
        assert est.sd == pytest.approx(34.0, rel=0.05)
        assert est.residual_sd == pytest.approx(5.0, rel=0.15)
        assert est.r_squared < 1.0


class TestReconstruct:
    def test_mean_maps_to_zero(self):
        est = reference_estimates()["d_aa"]
        assert reconstruct_index(est.beta0, est) == 0.0

    def test_one_sd_anchor(self):
        est = fit_index_normalization([(614.0, 0.0), (481.0, 1.0), (747.0, -1.0)], index="d_aa")
        assert reconstruct_index(481.0, est) == pytest.approx(1.0, abs=1e-12)

    def test_threshold_arithmetic_inverse(self):
        est = fit_index_normalization([(540.0, 0.0), (506.0, 1.0), (574.0, -1.0)], index="d_t")
        assert est.beta0 == pytest.approx(540.0)
        assert est.beta1 == pytest.approx(-34.0)
        assert reconstruct_index(486.0, est) == pytest.approx(54.0 / 34.0, abs=1e-9)

    @given(st.floats(min_value=-4.0, max_value=4.0, allow_nan=False))
    def test_roundtrip_within_1e12(self, d):
        est = reference_estimates()["d_t"]
        assert reconstruct_index(est.beta0 + est.beta1 * d, est) == pytest.approx(d, abs=1e-12)

    @given(st.floats(min_value=-4.0, max_value=4.0, allow_nan=False))
    def test_roundtrip_small_scale_index(self, d):
        # Smallest-magnitude slope in the reference set exercises cancellation.
        est = reference_estimates()["d_f"]
        assert reconstruct_index(est.beta0 + est.beta1 * d, est) == pytest.approx(d, abs=1e-12)


class TestProxyDeltaRadius:
    def test_published_scale_value(self):
        assert proxy_delta_radius(7.80, 7.83) == pytest.approx(0.03)

    def test_identity(self):
        assert proxy_delta_radius(7.80, 7.80) == 0.0

    def test_symmetry(self):
        assert proxy_delta_radius(6.50, 6.46) == pytest.approx(0.04)
        assert proxy_delta_radius(6.46, 6.50) == pytest.approx(0.04)

    def test_nonpositive_radius_rejected(self):
        with pytest.raises(ValueError):
            proxy_delta_radius(0.0, 7.8)

    def test_proxy_correlates_with_indices_on_oracle_data(self):
        ds = make_population(default_population_spec(n=2000, seed=7))
        for index, (base, enhanced) in (("d_f", ("bfs_front_r", "ebfs_front_r")),
                                        ("d_b", ("bfs_back_r", "ebfs_back_r"))):
            deltas = np.array([
                proxy_delta_radius(getattr(r, base), getattr(r, enhanced)) for r in ds.records
            ])
            d = ds.column(index)
            assert abs(np.corrcoef(deltas, d)[0, 1]) >= 0.97


class TestAnchors:
    def test_pachymetry_anchor_values(self):
        # Exams sitting exactly at D=0 (538 um) and D=1 (505 um).
        records = [
            ExamRecord(patient_id="a", pachy_min=538.0, d_t=0.0),
            ExamRecord(patient_id="b", pachy_min=505.0, d_t=1.0),
            ExamRecord(patient_id="c", pachy_min=571.0, d_t=-1.0),
        ]
        report = empirical_anchor_check(
            ExamDataset(records=tuple(records)), INDEX_DEFINITION_BY_NAME["d_t"]
        )
        assert report.d0_range == (538.0, 538.0)
        assert report.d1_range == (505.0, 505.0)
        assert report.delta_range == (33.0, 33.0)
        assert report.direction == "Decreasing"
        assert report.consistent is True

    def test_empty_window_reports_unavailable(self):
        records = [
            ExamRecord(patient_id="a", pachy_min=538.0, d_t=0.0),
            ExamRecord(patient_id="b", pachy_min=520.0, d_t=0.5),
            ExamRecord(patient_id="c", pachy_min=556.0, d_t=-0.5),
        ]
        report = empirical_anchor_check(
            ExamDataset(records=tuple(records)), INDEX_DEFINITION_BY_NAME["d_t"]
        )
        assert report.d1_range is None
        assert report.n1 == 0
        assert report.consistent is None

    def test_exact_linear_dataset_is_consistent_for_all_indices(self):
        ds = exact_linear_dataset(np.linspace(-1.2, 2.0, 33))  # grid includes 0 and 1
        for definition in DEFAULT_INDEX_DEFINITIONS:
            report = empirical_anchor_check(ds, definition)
            assert report.consistent is True, definition.index

    def test_direction_rule_matches_slope_sign_on_noise_free_data(self):
        ds = exact_linear_dataset(np.linspace(-1.2, 2.0, 33))
        suite = fit_all_indices(ds)
        for definition in DEFAULT_INDEX_DEFINITIONS:
            report = empirical_anchor_check(ds, definition)
            assert report.direction == suite.estimates[definition.index].direction


class TestFitAllIndices:
    def test_oracle_recovery_within_tolerance(self):
        ds = make_population(default_population_spec(n=2000, seed=7))
        suite = fit_all_indices(ds)
        assert not suite.failures
        for index, entry in published.REFERENCE_NORMALIZATION.items():
            est = suite.estimates[index]
            assert est.beta0 == pytest.approx(entry["beta0"], rel=0.01)
            assert est.sd == pytest.approx(abs(entry["beta1"]), rel=0.02)

    def test_missing_index_column_yields_failure_entry(self):
        ds = make_population(default_population_spec(n=200, seed=1))
        stripped = ExamDataset(
            records=tuple(dataclasses.replace(r, d_r=None) for r in ds.records),
            provenance=ds.provenance,
        )
        suite = fit_all_indices(stripped)
        assert set(suite.failures) == {"d_r"}
        assert len(suite.estimates) == 9

    def test_exact_data_gives_perfect_r_squared(self):
        ds = exact_linear_dataset(np.linspace(-1.2, 2.0, 33))
        suite = fit_all_indices(ds)
        for est in suite.estimates.values():
            assert est.r_squared == pytest.approx(1.0, abs=1e-12)

    def test_collinear_fit_reaches_machine_precision(self):
        ds = exact_linear_dataset(np.linspace(-1.2, 2.0, 33))
        suite = fit_all_indices(ds)
        for index, entry in published.REFERENCE_NORMALIZATION.items():
            est = suite.estimates[index]
            assert est.beta0 == pytest.approx(entry["beta0"], abs=1e-9)
            assert est.beta1 == pytest.approx(entry["beta1"], abs=1e-9)

    def test_suite_json_roundtrip(self):
        ds = exact_linear_dataset(np.linspace(-1.2, 2.0, 33))
        suite = fit_all_indices(ds)
        again = NormalizationSuite.from_json(suite.to_json())
        assert set(again.estimates) == set(suite.estimates)
        assert again.estimates["d_t"].beta0 == suite.estimates["d_t"].beta0

    def test_csv_layout(self):
        suite = NormalizationSuite(estimates=reference_estimates())
        text = suite.to_csv()
        lines = text.strip().splitlines()
        assert lines[0].startswith("index,source_measure,units,mean,sd")
        assert len(lines) == 11
