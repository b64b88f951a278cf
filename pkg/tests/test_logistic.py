import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from badlab.badfit import fit_bad, published_fit
from badlab.logistic import baseline_probability, logistic, logit, logit_linearity_report
from badlab.synthetic import LinkOverride, default_population_spec, make_population


class TestLogit:
    def test_symmetry_point(self):
        assert logit(0.5) == 0.0

    def test_inverse_of_baseline_probability(self):
        assert logit(0.655) == pytest.approx(0.641, abs=5e-4)

    def test_boundaries_rejected(self):
        for p in (0.0, 1.0, -0.1, 1.1):
            with pytest.raises(ValueError):
                logit(p)


class TestLogistic:
    def test_zero(self):
        assert logistic(0.0) == 0.5

    def test_published_baseline(self):
        assert logistic(0.640) == pytest.approx(0.655, abs=5e-4)

    def test_negative_symmetry(self):
        assert logistic(-0.640) == pytest.approx(0.345, abs=5e-4)

    def test_no_overflow_for_large_magnitudes(self):
        assert logistic(700.0) == pytest.approx(1.0)
        assert logistic(-700.0) == pytest.approx(0.0, abs=1e-300)
        assert 0.0 <= logistic(-700.0) <= 1.0

    @given(st.floats(min_value=-30.0, max_value=8.5, allow_nan=False))
    def test_logit_of_logistic_roundtrip(self, x):
        # Above x ~ 9.1 the round-trip error necessarily exceeds 1e-12 in
        # float64: logistic(x) sits within one ulp of 1, and adjacent doubles
        # there are ~ulp * e^x apart in x-space.  The achievable domain is
        # asserted here; the degradation beyond it is pinned below.
        assert logit(logistic(x)) == pytest.approx(x, abs=1e-12)

    def test_roundtrip_degrades_at_the_float64_information_bound(self):
        for x in (10.0, 15.0, 20.0, 25.0, 30.0):
            error = abs(logit(logistic(x)) - x)
            assert error <= 4e-16 * math.exp(x)

    @given(st.floats(min_value=1e-9, max_value=1.0 - 1e-9))
    def test_logistic_of_logit_roundtrip(self, p):
        assert logistic(logit(p)) == pytest.approx(p, abs=1e-12)

    @given(st.floats(min_value=-50.0, max_value=50.0, allow_nan=False))
    def test_complement_identity(self, x):
        assert logistic(x) + logistic(-x) == pytest.approx(1.0, abs=1e-15)

    def test_strictly_increasing(self):
        grid = np.linspace(-20.0, 20.0, 401)
        values = [logistic(x) for x in grid]
        assert all(b > a for a, b in zip(values, values[1:]))


class TestBaselineProbability:
    def test_published_intercept(self):
        assert baseline_probability(published_fit()) == pytest.approx(0.655, abs=5e-4)

    def test_zero_intercept(self):
        fit = dataclasses.replace(published_fit(), intercept_c=0.0)
        assert baseline_probability(fit) == 0.5

    def test_known_intercept_oracle(self):
        fit = dataclasses.replace(published_fit(), intercept_c=1.0)
        assert baseline_probability(fit) == pytest.approx(1.0 / (1.0 + math.exp(-1.0)), abs=1e-9)


class TestLogitLinearityReport:
    def test_exactly_linear_structure_has_no_flags(self):
        # Near-rank-1 correlation makes every scatter an almost exact line.
        spec = default_population_spec(n=1500, seed=5)
        equi = np.full((9, 9), 0.999999)
        np.fill_diagonal(equi, 1.0)
        ds = make_population(dataclasses.replace(spec, correlation=equi))
        report = logit_linearity_report(ds, fit_bad(ds))
        assert len(report.entries) == 9
        for entry in report.entries:
            assert entry.nonlinearity < 0.01
            assert not entry.curvature_flag
            assert not entry.flat_slope_flag

    def test_convex_link_flags_curvature(self):
        spec = default_population_spec(n=2000, seed=3)
        spec = dataclasses.replace(
            spec,
            correlation=np.eye(9),
            links=(LinkOverride(target="d_aa", source="d_p", amount=0.8),),
        )
        ds = make_population(spec)
        report = logit_linearity_report(ds, fit_bad(ds))
        by_index = {e.index: e for e in report.entries}
        assert by_index["d_p"].curvature_flag

    def test_near_zero_weight_flags_flat_slope(self):
        spec = default_population_spec(n=3000, seed=19)
        weights = dict(spec.weights)
        weights["d_y"] = 0.001
        ds = make_population(dataclasses.replace(spec, correlation=np.eye(9), weights=weights))
        report = logit_linearity_report(ds, fit_bad(ds))
        by_index = {e.index: e for e in report.entries}
        assert by_index["d_y"].flat_slope_flag
        assert not by_index["d_p"].flat_slope_flag

    def test_csv_shape(self):
        spec = default_population_spec(n=300, seed=2)
        ds = make_population(spec)
        report = logit_linearity_report(ds, fit_bad(ds))
        lines = report.to_csv().strip().splitlines()
        assert lines[0].startswith("index,slope,intercept")
        assert len(lines) == 10
