import math

import numpy as np
import pytest

from badlab.diagnostics import (
    CorrelationMatrix,
    correlation_matrix,
    linearity_report,
    loess_smooth,
    nonlinearity_score,
    vif,
    vif_from_correlation,
)
from badlab.errors import InsufficientDataError


def correlated_pair(rho, n, seed):
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n, 2))
    return z[:, 0], rho * z[:, 0] + math.sqrt(1 - rho * rho) * z[:, 1]


class TestCorrelationMatrix:
    def test_self_correlation_is_one(self):
        x = np.arange(10.0)
        corr = correlation_matrix({"a": x, "b": x + 1.0}, ["a", "b"])
        assert corr.get("a", "a") == 1.0
        assert corr.get("a", "b") == pytest.approx(1.0)

    def test_exact_negation(self):
        x = np.arange(10.0)
        corr = correlation_matrix({"a": x, "b": -x}, ["a", "b"])
        assert corr.get("a", "b") == pytest.approx(-1.0)

    def test_generated_rho_recovered_within_002(self):
        # Fisher-z sampling bound at n=5000 is ~0.006 (3 sigma); the fixed
        # seed keeps the draw comfortably inside +-0.02.
        a, b = correlated_pair(0.93, 5000, seed=10)
        corr = correlation_matrix({"d_aa": a, "d_am": b}, ["d_aa", "d_am"])
        assert corr.get("d_aa", "d_am") == pytest.approx(0.93, abs=0.02)

    def test_zero_variance_column_is_missing_not_propagated(self):
        x = np.arange(12.0)
        corr = correlation_matrix({"a": x, "flat": np.ones(12), "b": 2 * x}, ["a", "flat", "b"])
        assert math.isnan(corr.get("a", "flat"))
        assert ("a", "flat") in corr.undefined
        assert corr.get("a", "b") == pytest.approx(1.0)

    def test_pairwise_deletion(self):
        a = np.array([1.0, 2.0, 3.0, 4.0, np.nan])
        b = np.array([2.0, 4.0, 6.0, 8.0, 100.0])
        corr = correlation_matrix({"a": a, "b": b}, ["a", "b"])
        assert corr.get("a", "b") == pytest.approx(1.0)

    def test_affine_rescaling_invariance(self):
        a, b = correlated_pair(0.6, 500, seed=3)
        base = correlation_matrix({"a": a, "b": b}, ["a", "b"]).get("a", "b")
        scaled = correlation_matrix({"a": 1000.0 * a + 614.0, "b": b}, ["a", "b"]).get("a", "b")
        assert scaled == pytest.approx(base, abs=1e-12)

    def test_symmetry_validation(self):
        with pytest.raises(ValueError):
            CorrelationMatrix(labels=("a", "b"), values=np.array([[1.0, 0.5], [0.4, 1.0]]))


class TestVif:
    def test_independent_predictors_near_one(self):
        rng = np.random.default_rng(8)
        data = {name: rng.standard_normal(5000) for name in ("a", "b", "c")}
        report = vif(data, ["a", "b", "c"])
        for value in report.values.values():
            assert value == pytest.approx(1.0, abs=0.05)
        assert report.flagged == []

    def test_two_predictors_rho_09(self):
        a, b = correlated_pair(0.9, 5000, seed=0)
        report = vif({"a": a, "b": b}, ["a", "b"])
        expected = 1.0 / (1.0 - 0.81)
        assert report.values["a"] == pytest.approx(expected, abs=0.3)
        assert report.values["b"] == pytest.approx(expected, abs=0.3)
        assert set(report.flagged) == {"a", "b"}

    def test_perfect_collinearity_reports_infinity(self):
        x = np.random.default_rng(1).standard_normal(100)
        report = vif({"a": x, "b": 2.0 * x, "c": np.random.default_rng(2).standard_normal(100)}, ["a", "b", "c"])
        assert math.isinf(report.values["a"])
        assert math.isinf(report.values["b"])
        assert "collinear" in report.notes["a"]

    def test_insufficient_rows(self):
        with pytest.raises(InsufficientDataError):
            vif({"a": np.arange(3.0), "b": np.arange(3.0) ** 2}, ["a", "b"])

    def test_dual_route_agreement(self):
        # Regression route and inverse-correlation route agree to 1e-8.
        rng = np.random.default_rng(4)
        z = rng.standard_normal((4000, 4))
        data = {
            "a": z[:, 0],
            "b": 0.9 * z[:, 0] + math.sqrt(1 - 0.81) * z[:, 1],
            "c": z[:, 2],
            "d": 0.5 * z[:, 2] + math.sqrt(0.75) * z[:, 3],
        }
        names = ["a", "b", "c", "d"]
        regression_route = vif(data, names).values
        corr_route = vif_from_correlation(correlation_matrix(data, names))
        for name in names:
            assert regression_route[name] == pytest.approx(corr_route[name], abs=1e-8)


class TestLoess:
    def test_linear_data_reproduces_the_line(self):
        x = np.linspace(0.0, 10.0, 200)
        y = 3.0 * x - 2.0
        curve = loess_smooth(x, y, span=0.4)
        expected = 3.0 * curve.grid - 2.0
        assert np.max(np.abs(curve.values - expected)) < 1e-9

    def test_quadratic_tracked_within_002_on_interior(self):
        x = np.linspace(-1.0, 1.0, 500)
        y = x**2
        curve = loess_smooth(x, y, span=0.3)
        interior = (curve.grid >= -0.9) & (curve.grid <= 0.9)
        # Oracle: direct evaluation of the generating function.
        assert np.max(np.abs(curve.values[interior] - curve.grid[interior] ** 2)) < 0.02

    def test_constant_data_gives_flat_curve(self):
        x = np.linspace(0.0, 1.0, 50)
        curve = loess_smooth(x, np.full(50, 5.0), span=0.5)
        assert np.allclose(curve.values, 5.0)

    def test_window_never_below_three_points(self):
        x = np.linspace(0.0, 1.0, 20)
        curve = loess_smooth(x, x, span=0.01)
        assert curve.window == 3

    def test_too_few_points(self):
        with pytest.raises(InsufficientDataError):
            loess_smooth(np.arange(5.0), np.arange(5.0), span=0.5)

    def test_invalid_span(self):
        with pytest.raises(ValueError):
            loess_smooth(np.arange(20.0), np.arange(20.0), span=1.5)


class TestNonlinearity:
    def test_linear_data_scores_zero(self):
        x = np.linspace(0.0, 5.0, 300)
        result = nonlinearity_score(x, 2.0 * x + 1.0, span=0.5)
        assert result.score < 1e-6
        assert not result.flagged

    def test_strong_quadratic_flagged(self):
        x = np.linspace(-1.0, 1.0, 400)
        result = nonlinearity_score(x, x**2, span=0.3)
        assert result.score > 0.1
        assert result.flagged

    def test_affine_response_invariance(self):
        rng = np.random.default_rng(5)
        x = np.linspace(-1.0, 1.0, 300)
        y = x**2 + 0.05 * rng.standard_normal(300)
        base = nonlinearity_score(x, y, span=0.4).score
        rescaled = nonlinearity_score(x, -40.0 * y + 7.0, span=0.4).score
        assert rescaled == pytest.approx(base, rel=1e-9)

    def test_report_over_pairs(self):
        x = np.linspace(-1.0, 1.0, 200)
        data = {"lin": x, "quad": x**2, "resp": 2.0 * x}
        report = linearity_report(data, [("lin", "resp"), ("lin", "quad")], span=0.4)
        scores = {(p.predictor, p.response): p for p in report.pairs}
        assert not scores[("lin", "resp")].flagged
        assert scores[("lin", "quad")].flagged

    def test_convex_index_link_flags_the_pair(self):
        import dataclasses

        from badlab.synthetic import LinkOverride, default_population_spec, make_population

        # A monotone convex link between the progression index and the
        # average relational-thickness index.
        spec = dataclasses.replace(
            default_population_spec(n=2000, seed=3),
            correlation=np.eye(9),
            links=(LinkOverride(target="d_aa", source="d_p", amount=0.8),),
        )
        ds = make_population(spec)
        report = linearity_report(ds, [("d_p", "d_aa"), ("d_b", "d_final")], span=0.5)
        scores = {(p.predictor, p.response): p for p in report.pairs}
        assert scores[("d_p", "d_aa")].flagged
        assert scores[("d_p", "d_aa")].score > 0.1
