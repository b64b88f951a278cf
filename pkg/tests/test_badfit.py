import dataclasses
import math

import numpy as np
import pytest

from badlab import published
from badlab.badfit import (
    MODEL_INDICES,
    BadFit,
    art,
    fit_bad,
    mean_shift_decomposition,
    predict_dfinal,
    published_fit,
    sd_final,
)
from badlab.dataset import ExamDataset
from badlab.errors import InsufficientDataError, SingularDesignError
from badlab.synthetic import default_population_spec, make_population


@pytest.fixture(scope="module")
def oracle_ds():
    return make_population(default_population_spec(n=2000, seed=7))


class TestFitBad:
    def test_recovers_generating_weights_exactly(self, oracle_ds):
        fit = fit_bad(oracle_ds)
        for name in MODEL_INDICES:
            assert fit.weights[name] == pytest.approx(published.REGRESSION_WEIGHTS[name], abs=1e-9)
        assert fit.intercept_c == pytest.approx(published.INTERCEPT_C, abs=1e-9)
        assert fit.adjusted_r_squared >= 1.0 - 1e-12

    def test_perfect_collinearity_names_columns(self, oracle_ds):
        records = tuple(dataclasses.replace(r, d_am=r.d_aa) for r in oracle_ds.records)
        broken = ExamDataset(records=records)
        with pytest.raises(SingularDesignError) as err:
            fit_bad(broken)
        assert "d_aa" in str(err.value) and "d_am" in str(err.value)

    def test_too_few_rows(self, oracle_ds):
        small = ExamDataset(records=oracle_ds.records[:30])
        with pytest.raises(InsufficientDataError):
            fit_bad(small)

    def test_row_order_and_duplication_invariance(self, oracle_ds):
        base = fit_bad(oracle_ds)
        reversed_fit = fit_bad(ExamDataset(records=tuple(reversed(oracle_ds.records))))
        doubled_fit = fit_bad(ExamDataset(records=oracle_ds.records + oracle_ds.records))
        for name in MODEL_INDICES:
            assert reversed_fit.weights[name] == pytest.approx(base.weights[name], abs=1e-10)
            assert doubled_fit.weights[name] == pytest.approx(base.weights[name], abs=1e-10)

    def test_residuals_vanish_on_exact_data(self, oracle_ds):
        assert fit_bad(oracle_ds).residual_max_abs < 1e-6

    def test_json_roundtrip(self, oracle_ds):
        fit = fit_bad(oracle_ds)
        again = BadFit.from_dict(fit.to_dict())
        assert again.weights == fit.weights
        assert again.intercept_c == fit.intercept_c

    def test_csv_row_layout(self):
        text = published_fit().to_csv_row()
        lines = text.strip().splitlines()
        assert lines[0] == "c,w_aa,w_am,w_b,w_e,w_f,w_k,w_p,w_t,w_y"
        assert lines[1].startswith("0.64,0.133,0.132,0.14,")

    def test_published_reference_constants(self):
        fit = published_fit()
        assert fit.intercept_c == 0.640
        assert fit.weights["d_p"] == 0.166
        assert fit.weights["d_t"] == 0.168


class TestPredict:
    def test_all_zero_vector_gives_intercept(self):
        fit = published_fit()
        assert predict_dfinal(fit, {name: 0.0 for name in MODEL_INDICES}) == pytest.approx(0.640)

    def test_all_ones_vector(self):
        fit = published_fit()
        assert predict_dfinal(fit, [1.0] * 9) == pytest.approx(1.955, abs=1e-12)

    def test_single_index_contribution(self):
        fit = published_fit()
        d = {name: 0.0 for name in MODEL_INDICES}
        d["d_p"] = 1.0
        assert predict_dfinal(fit, d) == pytest.approx(0.806, abs=1e-12)

    def test_nonfinite_rejected(self):
        with pytest.raises(ValueError):
            predict_dfinal(published_fit(), [math.nan] + [0.0] * 8)

    def test_reproduces_fitting_data(self, oracle_ds):
        fit = fit_bad(oracle_ds)
        worst = 0.0
        for record in oracle_ds.records[:200]:
            d = {name: getattr(record, name) for name in MODEL_INDICES}
            worst = max(worst, abs(predict_dfinal(fit, d) - record.d_final))
        assert worst < 1e-6


class TestSdFinal:
    def test_perfectly_correlated_unit_weights(self):
        corr = np.array([[1.0, 1.0], [1.0, 1.0]])
        assert sd_final([1.0, 1.0], corr) == pytest.approx(2.0, abs=1e-12)

    def test_independent_unit_weights(self):
        assert sd_final([1.0, 1.0], np.eye(2)) == pytest.approx(math.sqrt(2.0), abs=1e-12)

    def test_published_weights_identity_correlation(self):
        w = [published.REGRESSION_WEIGHTS[name] for name in MODEL_INDICES]
        value = sd_final(w, np.eye(9))
        assert value == pytest.approx(0.4405, abs=1e-4)
        # With no correlations this is exactly the Euclidean norm.
        assert value == pytest.approx(float(np.linalg.norm(w)), abs=1e-15)

    def test_non_psd_rejected(self):
        corr = np.full((3, 3), -0.9)
        np.fill_diagonal(corr, 1.0)
        with pytest.raises(ValueError, match="positive semidefinite"):
            sd_final([1.0, 1.0, 1.0], corr)

    def test_entry_outside_unit_interval_rejected(self):
        corr = np.array([[1.0, 1.2], [1.2, 1.0]])
        with pytest.raises(ValueError):
            sd_final([1.0, 1.0], corr)


class TestArt:
    def test_typical_values(self):
        assert art(540.0, 0.90) == pytest.approx(600.0)

    def test_unit_divisor(self):
        assert art(540.0, 1.0) == 540.0

    def test_zero_numerator(self):
        assert art(0.0, 0.9) == 0.0

    def test_nonpositive_progression_rejected(self):
        with pytest.raises(ValueError):
            art(540.0, 0.0)


class TestMeanShift:
    def test_zero_means_give_intercept(self):
        fit = published_fit()
        result = mean_shift_decomposition(fit, {name: 0.0 for name in MODEL_INDICES})
        assert result.total == pytest.approx(0.640)

    def test_single_shifted_index(self):
        fit = published_fit()
        means = {name: 0.0 for name in MODEL_INDICES}
        means["d_p"] = 0.76
        result = mean_shift_decomposition(fit, means)
        assert result.total == pytest.approx(0.640 + 0.166 * 0.76, abs=1e-12)
        assert result.contributions["d_p"] == pytest.approx(0.12616, abs=1e-12)

    def test_total_matches_sample_mean_of_output(self, oracle_ds):
        fit = fit_bad(oracle_ds)
        means = {name: float(np.mean(oracle_ds.column(name))) for name in MODEL_INDICES}
        result = mean_shift_decomposition(fit, means)
        sample_mean = float(np.mean(oracle_ds.column("d_final")))
        assert result.total == pytest.approx(sample_mean, abs=1e-9)
        # Also trivially within 3 standard errors.
        se = float(np.std(oracle_ds.column("d_final"), ddof=1)) / math.sqrt(len(oracle_ds))
        assert abs(result.total - sample_mean) <= 3 * se

    def test_decomposition_identity_equals_prediction_at_means(self, oracle_ds):
        fit = fit_bad(oracle_ds)
        means = {name: float(np.mean(oracle_ds.column(name))) for name in MODEL_INDICES}
        assert mean_shift_decomposition(fit, means).total == predict_dfinal(fit, means)
