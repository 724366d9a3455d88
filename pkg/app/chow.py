import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import betainc

from app.errors import DimensionMismatch, InsufficientData, InvalidParameters
from app.regression import qr_factor, residual_sum_of_squares

logger = logging.getLogger(__name__)

QUANTILE_XTOL = 1e-12


@dataclass(frozen=True)
class ChowResult:
    f_value: float
    df1: int
    df2: int
    critical_value: float
    accepted: bool
    rss_pooled: float
    rss_first: float
    rss_second: float


def _check_df(df1: float, df2: float) -> None:
    if not (df1 >= 1 and df2 >= 1) or not (math.isfinite(df1) and math.isfinite(df2)):
        raise InvalidParameters(f"degrees of freedom must be >= 1, got ({df1}, {df2})")


def f_cdf(x: float, df1: float, df2: float) -> float:
    """P(F <= x) via the regularized incomplete beta function."""
    _check_df(df1, df2)
    if x <= 0:
        return 0.0
    return float(betainc(df1 / 2, df2 / 2, df1 * x / (df1 * x + df2)))


def f_sf(x: float, df1: float, df2: float) -> float:
    """P(F > x), evaluated on the complementary beta argument to keep the upper tail accurate."""
    _check_df(df1, df2)
    if x <= 0:
        return 1.0
    return float(betainc(df2 / 2, df1 / 2, df2 / (df2 + df1 * x)))


def f_quantile(df1: int, df2: int, alpha: float) -> float:
    """Upper-alpha quantile x with P(F > x) = alpha, by bracketed root finding."""
    _check_df(df1, df2)
    if not 0 < alpha < 1:
        raise InvalidParameters(f"alpha must lie in (0, 1), got {alpha}")

    upper = 1.0
    while f_sf(upper, df1, df2) > alpha:
        upper *= 2
        if upper > 1e300:
            raise InvalidParameters(f"could not bracket the F({df1}, {df2}) quantile at alpha={alpha}")
    return float(brentq(lambda x: f_sf(x, df1, df2) - alpha, 0.0, upper, xtol=QUANTILE_XTOL))


def chow_test(X1, y1, X2, y2, alpha: float = 0.05) -> ChowResult:
    """
    Chow test of one coefficient vector for two regressions on the same columns.

    F = ((RSS_pooled - RSS_1 - RSS_2) / k) / ((RSS_1 + RSS_2) / (n1 + n2 - 2k)),
    k = p + 1, accepted when F is below the upper-alpha F(k, n1+n2-2k) quantile.
    """
    X1, X2 = np.asarray(X1, dtype=float), np.asarray(X2, dtype=float)
    y1, y2 = np.asarray(y1, dtype=float), np.asarray(y2, dtype=float)
    if X1.ndim != 2 or X2.ndim != 2 or X1.shape[1] != X2.shape[1]:
        raise DimensionMismatch(f"designs of shape {X1.shape} and {X2.shape} do not share columns")
    if y1.shape != (X1.shape[0],) or y2.shape != (X2.shape[0],):
        raise DimensionMismatch("response lengths do not match their designs")

    k = X1.shape[1]
    df2 = X1.shape[0] + X2.shape[0] - 2 * k
    if df2 <= 0:
        raise InsufficientData(f"n1 + n2 - 2(p+1) = {df2} leaves no degrees of freedom")

    rss_first = residual_sum_of_squares(X1, y1)
    rss_second = residual_sum_of_squares(X2, y2)
    rss_pooled = residual_sum_of_squares(np.vstack([X1, X2]), np.concatenate([y1, y2]))
    return chow_from_rss(rss_pooled, rss_first, rss_second, k, df2, f_quantile(k, df2, alpha))


def chow_test_shared_design(X, y1, y2, critical_value: float) -> ChowResult:
    """
    Chow test for two responses observed on the same design rows.

    Uses one QR of X: the pooled fit of [y1; y2] on [X; X] is the fit of the
    mean response, so RSS_pooled = 2 RSS((y1+y2)/2) + |y1 - y2|^2 / 2.
    """
    X = np.asarray(X, dtype=float)
    y1, y2 = np.asarray(y1, dtype=float), np.asarray(y2, dtype=float)
    if y1.shape != (X.shape[0],) or y2.shape != (X.shape[0],):
        raise DimensionMismatch("response lengths do not match the shared design")
    k = X.shape[1]
    df2 = 2 * X.shape[0] - 2 * k
    if df2 <= 0:
        raise InsufficientData(f"2n - 2(p+1) = {df2} leaves no degrees of freedom")

    Q, _ = qr_factor(X)

    def rss(v: np.ndarray) -> float:
        r = v - Q @ (Q.T @ v)
        return float(r @ r)

    gap = y1 - y2
    rss_pooled = 2 * rss((y1 + y2) / 2) + float(gap @ gap) / 2
    return chow_from_rss(rss_pooled, rss(y1), rss(y2), k, df2, critical_value)


def chow_from_rss(rss_pooled: float, rss_first: float, rss_second: float, k: int, df2: int,
                  critical_value: float) -> ChowResult:
    """Chow statistic from the three residual sums of squares and a precomputed critical value."""
    rss_split = rss_first + rss_second
    gain = max(rss_pooled - rss_split, 0.0)
    if rss_split == 0:
        f_value = 0.0 if gain == 0 else math.inf
    else:
        f_value = (gain / k) / (rss_split / df2)
    return ChowResult(
        f_value=f_value,
        df1=k,
        df2=df2,
        critical_value=critical_value,
        accepted=f_value < critical_value,
        rss_pooled=rss_pooled,
        rss_first=rss_first,
        rss_second=rss_second,
    )
