from fractions import Fraction

import numpy as np
import pytest

from app.errors import ConstantResponse, DimensionMismatch, InsufficientData, RankDeficient, SchemaMismatch
from app.regression import (
    Dataset,
    fit_ols,
    qr_factor,
    residual_projector_apply,
    residual_sum_of_squares,
)


def exact_simple_regression(x, y):
    """Intercept, slope and RSS of y on (1, x) in rational arithmetic."""
    x = [Fraction(v) for v in x]
    y = [Fraction(v) for v in y]
    n = len(x)
    x_bar, y_bar = sum(x) / n, sum(y) / n
    sxx = sum((xi - x_bar) ** 2 for xi in x)
    sxy = sum((xi - x_bar) * (yi - y_bar) for xi, yi in zip(x, y))
    syy = sum((yi - y_bar) ** 2 for yi in y)
    slope = sxy / sxx
    return y_bar - slope * x_bar, slope, syy - sxy * sxy / sxx, syy


class TestDataset:
    def test_with_intercept_prepends_ones(self):
        """The design starts with the ones column named 'intercept'."""
        data = Dataset.with_intercept([[1.0], [2.0], [4.0]], [1.0, 2.0, 2.5], ["x"], "y")
        np.testing.assert_array_equal(data.X[:, 0], np.ones(3))
        assert data.column_names == ("intercept", "x")
        assert (data.n, data.p) == (3, 1)

    def test_arrays_are_read_only(self, small_data):
        """Stored arrays cannot be modified in place."""
        with pytest.raises(ValueError):
            small_data.y[0] = 0.0

    def test_length_mismatch(self):
        """y shorter than X is rejected."""
        with pytest.raises(DimensionMismatch):
            Dataset.with_intercept([[1.0], [2.0], [3.0]], [1.0, 2.0], ["x"], "y")

    def test_missing_intercept(self):
        """A first column other than ones is a schema error."""
        with pytest.raises(SchemaMismatch):
            Dataset(np.array([[2.0, 1.0], [2.0, 2.0], [2.0, 3.0]]), [1.0, 2.0, 4.0], ("c", "x"), "y")

    def test_too_few_rows(self):
        """n must exceed p + 1."""
        with pytest.raises(InsufficientData):
            Dataset.with_intercept([[1.0], [2.0]], [1.0, 2.0], ["x"], "y")

    def test_take_keeps_order(self, small_data):
        """A subsample keeps the requested row order."""
        sub = small_data.take([5, 2, 9, 0, 7, 3])
        np.testing.assert_array_equal(sub.y, small_data.y[[5, 2, 9, 0, 7, 3]])


class TestFitOls:
    def test_matches_exact_rational_solution(self):
        """Coefficients, RSS and R^2 agree with rational arithmetic on a small case."""
        x, y = [0, 1, 2, 3, 5], [1, 3, 2, 5, 6]
        intercept, slope, rss, tss = exact_simple_regression(x, y)
        fit = fit_ols(Dataset.with_intercept(np.array(x, dtype=float), y, ["x"], "y"))
        np.testing.assert_allclose(fit.beta_hat, [float(intercept), float(slope)], rtol=1e-13)
        assert fit.rss == pytest.approx(float(rss), rel=1e-12)
        assert fit.r_squared == pytest.approx(float(1 - rss / tss), rel=1e-12)

    def test_matches_normal_equations(self, rng, make_dataset):
        """beta, t-values and the (X'X)^-1 diagonal agree with the textbook formulas."""
        data = make_dataset(rng, 120, 5)
        fit = fit_ols(data)
        xtx_inv = np.linalg.inv(data.X.T @ data.X)
        beta = xtx_inv @ data.X.T @ data.y
        residual = data.y - data.X @ beta
        sigma2 = residual @ residual / (data.n - data.p - 1)
        np.testing.assert_allclose(fit.beta_hat, beta, rtol=1e-9)
        np.testing.assert_allclose(fit.xtx_inv_diag, np.diag(xtx_inv), rtol=1e-9)
        np.testing.assert_allclose(fit.t_values, beta / np.sqrt(sigma2 * np.diag(xtx_inv)), rtol=1e-9)

    def test_residuals_orthogonal_to_design(self, rng, make_dataset):
        """X'e = 0 and y = y_hat + e."""
        data = make_dataset(rng, 200, 8)
        fit = fit_ols(data)
        scale = np.linalg.norm(data.X, axis=0) * np.linalg.norm(fit.residual)
        assert np.all(np.abs(data.X.T @ fit.residual) <= 1e-10 * scale)
        np.testing.assert_allclose(fit.y_hat + fit.residual, data.y, rtol=1e-12)

    def test_r_squared_in_unit_interval(self, small_data):
        """0 <= R^2 <= 1 and equals 1 - RSS/TSS."""
        fit = fit_ols(small_data)
        assert 0 <= fit.r_squared <= 1
        assert fit.r_squared == pytest.approx(1 - fit.rss / fit.tss)

    def test_constant_response(self):
        """A constant response has no variation to explain."""
        data = Dataset.with_intercept([[1.0], [2.0], [3.0], [4.0]], [5.0] * 4, ["x"], "y")
        with pytest.raises(ConstantResponse):
            fit_ols(data)

    def test_rank_deficient_design(self, rng):
        """A duplicated column makes the design rank deficient."""
        x = rng.standard_normal(30)
        data = Dataset.with_intercept(np.column_stack([x, 2 * x]), rng.standard_normal(30), ["x", "x2"], "y")
        with pytest.raises(RankDeficient):
            fit_ols(data)

    def test_exact_fit(self):
        """A perfect fit gives RSS = 0 and R^2 = 1 without failing."""
        data = Dataset.with_intercept([[0.0], [1.0], [2.0], [3.0]], [1.0, 3.0, 5.0, 7.0], ["x"], "y")
        fit = fit_ols(data)
        assert fit.rss == pytest.approx(0.0, abs=1e-24)
        assert fit.r_squared == pytest.approx(1.0)

    @pytest.mark.parametrize("seed", range(20))
    def test_intercept_only(self, seed):
        """With no explanatory columns beta is the mean and R^2 is exactly 0."""
        rng = np.random.default_rng(seed)
        y = 50.0 + rng.standard_normal(40)
        fit = fit_ols(Dataset.with_intercept(np.empty((40, 0)), y, [], "y"))
        assert fit.beta_hat[0] == pytest.approx(np.mean(y), rel=1e-14)
        assert fit.r_squared == 0.0

    def test_squared_correlation_with_fitted_values(self, rng, make_dataset):
        """corr(y, y_hat)^2 equals R^2."""
        data = make_dataset(rng, 150, 6)
        fit = fit_ols(data)
        assert np.corrcoef(data.y, fit.y_hat)[0, 1] ** 2 == pytest.approx(fit.r_squared, rel=1e-10)

    def test_repeated_fits_are_identical(self, small_data):
        """Fitting the same data twice gives bit-identical output."""
        first, second = fit_ols(small_data), fit_ols(small_data)
        np.testing.assert_array_equal(first.beta_hat, second.beta_hat)
        np.testing.assert_array_equal(first.residual, second.residual)
        np.testing.assert_array_equal(first.t_values, second.t_values)
        assert (first.rss, first.r_squared) == (second.rss, second.r_squared)


class TestResidualProjector:
    def test_projection_is_orthogonal_to_design(self, rng, small_data):
        """X'(Mw) = 0 and M is idempotent."""
        fit = fit_ols(small_data)
        w = rng.standard_normal(small_data.n)
        projected = residual_projector_apply(fit, small_data, w)
        assert np.max(np.abs(small_data.X.T @ projected)) < 1e-10 * np.linalg.norm(w) * np.linalg.norm(small_data.X)
        np.testing.assert_allclose(residual_projector_apply(fit, small_data, projected), projected, atol=1e-12)

    def test_projects_response_to_residual(self, small_data):
        """M y is the OLS residual."""
        fit = fit_ols(small_data)
        np.testing.assert_allclose(residual_projector_apply(fit, small_data, small_data.y), fit.residual,
                                   atol=1e-10)

    def test_length_mismatch(self, small_data):
        """A vector of the wrong length is rejected."""
        fit = fit_ols(small_data)
        with pytest.raises(DimensionMismatch):
            residual_projector_apply(fit, small_data, np.ones(small_data.n + 1))

    def test_matches_dense_projector(self, rng, make_dataset):
        """Agrees with I - X(X'X)^-1 X' formed explicitly at n = 20, p = 3."""
        data = make_dataset(rng, 20, 3)
        X = data.X
        projector = np.eye(20) - X @ np.linalg.inv(X.T @ X) @ X.T
        w = rng.standard_normal(20)
        np.testing.assert_allclose(residual_projector_apply(fit_ols(data), data, w), projector @ w, atol=1e-12)


class TestQrFactor:
    def test_reconstructs_design(self, small_data):
        """Q R reproduces X and Q has orthonormal columns."""
        Q, R = qr_factor(small_data.X)
        np.testing.assert_allclose(Q @ R, small_data.X, atol=1e-12)
        np.testing.assert_allclose(Q.T @ Q, np.eye(Q.shape[1]), atol=1e-12)

    def test_residual_sum_of_squares_matches_fit(self, small_data):
        """The standalone RSS equals the one from fit_ols."""
        assert residual_sum_of_squares(small_data.X, small_data.y) == pytest.approx(fit_ols(small_data).rss)
