import pytest
import scipy.stats

from badlab.errors import InsufficientDataError
from badlab.meta import (
    RANGE_IQR,
    UNITS_SD,
    UNITS_SOURCE,
    StudySummary,
    convert_study_units,
    load_bundled_studies,
    study_table,
    welch_from_moments,
    welch_t,
)
from badlab.normalization import reference_estimates
from badlab.special import normal_cdf, regularized_incomplete_beta, student_t_cdf


def summary(study_id, quantity="d_final", **kwargs):
    return StudySummary(study_id=study_id, quantity=quantity, **kwargs)


class TestSpecialFunctions:
    def test_t_cdf_against_scipy(self):
        for df in (1.0, 2.5, 10.0, 100.0, 367.0, 2000.0):
            for t in (-6.7, -2.0, -0.5, 0.0, 0.5, 2.0, 6.7):
                assert student_t_cdf(t, df) == pytest.approx(
                    float(scipy.stats.t.cdf(t, df)), abs=1e-8
                )

    def test_incomplete_beta_against_scipy(self):
        for a, b in ((0.5, 0.5), (2.0, 3.0), (50.0, 0.5), (183.5, 0.5)):
            for x in (0.0, 0.01, 0.3, 0.7, 0.99, 1.0):
                assert regularized_incomplete_beta(a, b, x) == pytest.approx(
                    float(scipy.special.betainc(a, b, x)), abs=1e-10
                )

    def test_t_cdf_approaches_normal_for_large_df(self):
        for x in (-3.0, -1.0, 0.0, 1.0, 2.5):
            assert student_t_cdf(x, 1000.0) == pytest.approx(normal_cdf(x), abs=1e-3)

    def test_normal_cdf_reference_points(self):
        assert normal_cdf(0.0) == 0.5
        assert normal_cdf(1.6) == pytest.approx(0.945201, abs=1e-6)
        assert normal_cdf(2.6) == pytest.approx(0.995339, abs=1e-6)


class TestWelch:
    def test_identical_groups(self):
        a = summary("x", mean=0.8, sd=0.5, n=100)
        b = summary("y", mean=0.8, sd=0.5, n=100)
        result = welch_t(a, b)
        assert result.t == 0.0
        assert result.p == pytest.approx(1.0)

    def test_published_pair_is_significant(self):
        # Two published normal-group rows: (0.43 +- 0.57, n=200) and
        # (0.75 +- 0.56, n=480).
        result = welch_from_moments(0.43, 0.57, 200, 0.75, 0.56, 480)
        assert abs(result.t) == pytest.approx(6.70, abs=0.05)
        assert result.df == pytest.approx(367, abs=1.0)
        assert result.p < 1e-9

    def test_published_pair_not_significant(self):
        result = welch_from_moments(0.96, 0.8, 100, 1.03, 0.58, 200)
        assert abs(result.t) < 1.0
        assert result.p > 0.05

    def test_antisymmetry(self):
        a = summary("x", mean=0.4, sd=0.6, n=50)
        b = summary("y", mean=0.9, sd=0.5, n=80)
        fwd, rev = welch_t(a, b), welch_t(b, a)
        assert fwd.t == pytest.approx(-rev.t, abs=1e-15)
        assert fwd.p == pytest.approx(rev.p, abs=1e-15)
        assert fwd.df == pytest.approx(rev.df, abs=1e-12)

    def test_missing_moments_rejected(self):
        a = summary("x", median=0.9, n=50)
        b = summary("y", mean=0.9, sd=0.5, n=50)
        with pytest.raises(InsufficientDataError):
            welch_t(a, b)

    def test_mismatched_quantities_rejected(self):
        a = summary("x", quantity="d_aa", mean=0.5, sd=0.7, n=50)
        b = summary("y", quantity="d_p", mean=0.5, sd=0.7, n=50)
        with pytest.raises(ValueError):
            welch_t(a, b)


class TestUnitConversion:
    def test_art_average_row(self):
        # (555 +- 94) um converts to about (0.44 +- 0.71) SD.
        est = reference_estimates()["d_aa"]
        source = summary("hashemi2016", quantity="d_aa", mean=555.0, sd=94.0, n=100, units=UNITS_SOURCE)
        converted = convert_study_units(source, est)
        assert converted.units == UNITS_SD
        assert converted.mean == pytest.approx(0.44, abs=0.01)
        assert converted.sd == pytest.approx(0.71, abs=0.01)

    def test_value_at_the_mean_maps_to_zero(self):
        est = reference_estimates()["d_p"]
        source = summary("x", quantity="d_p", mean=est.beta0, sd=0.15, n=10, units=UNITS_SOURCE)
        assert convert_study_units(source, est).mean == pytest.approx(0.0, abs=1e-12)

    def test_progression_row_agrees_with_published_within_rounding(self):
        est = reference_estimates()["d_p"]
        source = summary("villavicencio2014", quantity="d_p", mean=0.92, sd=0.13, n=682, units=UNITS_SOURCE)
        converted = convert_study_units(source, est)
        assert converted.mean == pytest.approx(0.92 / 0.15 - 6.0, abs=1e-12)  # (0.92-0.90)/0.15
        # Published conversion (0.10 +- 0.88) came from unrounded inputs;
        # agreement is within rounding slack.
        assert converted.mean == pytest.approx(0.10, abs=0.05)
        assert converted.sd == pytest.approx(0.88, abs=0.05)

    def test_negative_slope_swaps_range_order(self):
        est = reference_estimates()["d_aa"]
        source = summary(
            "steinberg2015", quantity="d_aa", n=196, mean=548.2, sd=116.8,
            range_low=490.0, range_high=626.0, range_kind=RANGE_IQR, units=UNITS_SOURCE,
        )
        converted = convert_study_units(source, est)
        assert converted.range_low < converted.range_high
        assert converted.range_low == pytest.approx(-0.09, abs=0.01)
        assert converted.range_high == pytest.approx(0.93, abs=0.01)
        assert converted.range_kind == RANGE_IQR  # stays an IQR, converted affinely

    def test_roundtrip_through_reverse_affine_map(self):
        est = reference_estimates()["d_am"]
        source = summary("x", quantity="d_am", mean=437.6, sd=100.1, median=443.5,
                         range_low=395.0, range_high=502.0, n=196, units=UNITS_SOURCE)
        converted = convert_study_units(source, est)
        back_mean = est.beta0 + est.beta1 * converted.mean
        back_sd = converted.sd * est.sd
        assert back_mean == pytest.approx(437.6, abs=1e-12)
        assert back_sd == pytest.approx(100.1, abs=1e-12)

    def test_wrong_units_rejected(self):
        est = reference_estimates()["d_aa"]
        with pytest.raises(ValueError):
            convert_study_units(summary("x", quantity="d_aa", mean=0.4, sd=0.7, n=10), est)


class TestStudyTable:
    def test_bundled_fixture_loads(self):
        studies = load_bundled_studies()
        assert len(studies) == 39
        dfinal_rows = [s for s in studies if s.quantity == "d_final"]
        assert len(dfinal_rows) == 10
        ambiguous = [s for s in dfinal_rows if s.study_id == "ambrosio2017"]
        assert "ambiguous" in ambiguous[0].note

    def test_pairwise_matrix_over_dfinal(self):
        report = study_table(load_bundled_studies(), reference_estimates())
        # 7 of the 10 d_final rows carry both mean and SD -> C(7,2) pairs.
        assert len(report.welch) == 21
        results = {(a, b): r for a, b, r in report.welch}
        ramos_steinberg = results.get(("ramos2012", "steinberg2015")) or results.get(
            ("steinberg2015", "ramos2012")
        )
        assert ramos_steinberg.p < 0.05

    def test_single_study_has_empty_matrix(self):
        report = study_table([summary("only", mean=0.5, sd=0.5, n=30)])
        assert report.welch == ()

    def test_unconvertible_rows_flagged_but_processed(self):
        studies = [
            summary("a", quantity="d_k", mean=45.5, sd=1.5, n=50, units=UNITS_SOURCE),
            summary("b", mean=0.7, sd=0.5, n=60),
        ]
        report = study_table(studies, estimates={})  # no estimates supplied
        assert report.unconvertible == ("a:d_k",)
        assert len(report.rows) == 2

    def test_source_rows_convert_when_estimates_available(self):
        report = study_table(load_bundled_studies(), reference_estimates())
        assert report.unconvertible == ()
        assert all(r.units == UNITS_SD for r in report.rows)

    def test_csv_and_markdown_render(self):
        report = study_table(load_bundled_studies(), reference_estimates())
        assert report.to_csv().startswith("study_id,quantity,n,")
        assert report.to_markdown().startswith("| study |")
        assert len(report.welch_csv().strip().splitlines()) == 22
