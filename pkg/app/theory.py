"""
Closed-form effect of the noise on t-values, R^2 and the correlation with the
original response, and a check of a concrete release against those values.

With k = 1 + b + a(a+2):
    t_scale      = sqrt((1+b) / k)
    R^2 released = (1+b) R^2 / (1 + b + a(a+2)(1-R^2))
    correlation  = (1 + b + a(1-R^2)) / (sqrt(1+b) sqrt(1 + b + a(a+2)(1-R^2)))
a = -2 makes a(a+2) vanish, so t-values and R^2 are kept for every b.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Sequence

import numpy as np
import pandas as pd

from app.errors import DimensionMismatch, InvalidParameters, UndefinedScale
from app.regression import Dataset, fit_ols

if TYPE_CHECKING:
    from app.noise.engine import PerturbedRelease

logger = logging.getLogger(__name__)

TABLE_R2 = (0.4, 0.6, 0.8)
TABLE_B = tuple(0.25 * i for i in range(9))


@dataclass(frozen=True)
class TheoryPrediction:
    t_scale: float
    r_squared_perturbed: float
    correlation: float
    a: float
    b: float
    r_squared_original: float


def _validate(a: float, b: float, r2: float) -> None:
    if not math.isfinite(a) or a == 0:
        raise InvalidParameters(f"a must be finite and nonzero, got {a}")
    if not math.isfinite(b) or b < 0:
        raise InvalidParameters(f"b must be finite and >= 0, got {b}")
    if not 0 <= r2 < 1:
        raise InvalidParameters(f"R^2 must lie in [0, 1), got {r2}")


def predict(a: float, b: float, r2: float) -> TheoryPrediction:
    """Predicted t-value scale, released R^2 and correlation for parameters (a, b)."""
    _validate(a, b, r2)
    growth = a * (a + 2)
    scale_denominator = 1 + b + growth
    if scale_denominator <= 0:
        raise UndefinedScale(f"1 + b + a(a+2) = {scale_denominator:.6g} <= 0 for a={a}, b={b}")

    if growth == 0:
        t_scale = 1.0
        r2_perturbed = r2
    else:
        t_scale = math.sqrt((1 + b) / scale_denominator)
        r2_perturbed = (1 + b) * r2 / (1 + b + growth * (1 - r2))
    correlation = (1 + b + a * (1 - r2)) / (math.sqrt(1 + b) * math.sqrt(1 + b + growth * (1 - r2)))

    return TheoryPrediction(
        t_scale=t_scale,
        r_squared_perturbed=r2_perturbed,
        correlation=correlation,
        a=a,
        b=b,
        r_squared_original=r2,
    )


def reduced_accuracy_params(b: float) -> tuple[float, float]:
    """
    The two values a = -1 +/- sqrt(b+2).

    Both satisfy a(a+2) = b+1, so every t-value is scaled by 1/sqrt(2) and
    R^2 becomes R^2 / (2 - R^2).
    """
    if not math.isfinite(b) or b <= 0:
        raise InvalidParameters(f"reduced-accuracy mode needs b > 0, got {b}")
    root = math.sqrt(b + 2)
    return -1 + root, -1 - root


def restore_original_statistics(t_values_reduced, r2_reduced: float) -> tuple[np.ndarray, float]:
    """Invert the reduced-accuracy map: t = sqrt(2) * t_reduced, R^2 = 2 R~^2 / (1 + R~^2)."""
    if not 0 <= r2_reduced < 1:
        raise InvalidParameters(f"reduced R^2 must lie in [0, 1), got {r2_reduced}")
    t_values = math.sqrt(2) * np.asarray(t_values_reduced, dtype=float)
    return t_values, 2 * r2_reduced / (1 + r2_reduced)


def correlation_table(r2_grid: Sequence[float] = TABLE_R2, b_grid: Sequence[float] = TABLE_B,
                      a: float = -2.0) -> pd.DataFrame:
    """Correlation of y and y+eps over an R^2 x b grid (rows R^2, columns b)."""
    rows = [[predict(a, b, r2).correlation for b in b_grid] for r2 in r2_grid]
    table = pd.DataFrame(rows, index=pd.Index(list(r2_grid), name="R2"), columns=list(b_grid))
    table.columns.name = "b"
    return table


@dataclass(frozen=True)
class Check:
    quantity: str
    expected: float
    observed: float
    abs_deviation: float
    rel_deviation: float
    passed: bool


@dataclass(frozen=True)
class VerificationReport:
    a: float
    b: float
    r_squared_original: float
    tol: float
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def to_key_values(self) -> str:
        """Flat key=value text, one pair per line."""
        lines = [
            f"passed={str(self.passed).lower()}",
            f"a={self.a!r}",
            f"b={self.b!r}",
            f"r_squared_original={self.r_squared_original!r}",
            f"tol={self.tol!r}",
        ]
        for check in self.checks:
            prefix = f"check.{check.quantity}"
            lines.extend([
                f"{prefix}.expected={check.expected!r}",
                f"{prefix}.observed={check.observed!r}",
                f"{prefix}.abs_deviation={check.abs_deviation!r}",
                f"{prefix}.rel_deviation={check.rel_deviation!r}",
                f"{prefix}.passed={str(check.passed).lower()}",
            ])
        return "\n".join(lines) + "\n"


def _check(quantity: str, expected: float, observed: float, deviation: float, scale: float, tol: float) -> Check:
    rel = deviation / scale if scale > 0 else math.inf if deviation > 0 else 0.0
    return Check(
        quantity=quantity,
        expected=float(expected),
        observed=float(observed),
        abs_deviation=float(deviation),
        rel_deviation=float(rel),
        # relative above unit scale, absolute below it
        passed=bool(deviation <= tol * max(1.0, scale)),
    )


def verify_release(data: Dataset, release: "PerturbedRelease", tol: float = 1e-9) -> VerificationReport:
    """Refit on the released response and compare every quantity with its predicted value."""
    y_released = np.asarray(release.y_perturbed, dtype=float)
    if y_released.shape != data.y.shape:
        raise DimensionMismatch(f"release has {y_released.shape[0]} rows, dataset has {data.n}")

    spec = release.spec
    original = fit_ols(data)
    refit = fit_ols(data.with_response(y_released))
    prediction = predict(spec.a, spec.b, original.r_squared)

    checks = []
    mean_scale = max(abs(original.y_bar), math.sqrt(original.tss / data.n))
    released_mean = float(np.mean(y_released))
    checks.append(_check("mean", original.y_bar, released_mean,
                         abs(released_mean - original.y_bar), mean_scale, tol))

    beta_norm = float(np.linalg.norm(original.beta_hat))
    checks.append(_check("beta", beta_norm, float(np.linalg.norm(refit.beta_hat)),
                         float(np.linalg.norm(refit.beta_hat - original.beta_hat)), beta_norm, tol))

    nonzero = original.t_values != 0
    ratios = refit.t_values[nonzero] / original.t_values[nonzero]
    worst = float(np.max(np.abs(ratios - prediction.t_scale))) if ratios.size else 0.0
    observed_scale = float(np.mean(ratios)) if ratios.size else prediction.t_scale
    checks.append(_check("t_scale", prediction.t_scale, observed_scale, worst, prediction.t_scale, tol))

    checks.append(_check("r_squared", prediction.r_squared_perturbed, refit.r_squared,
                         abs(refit.r_squared - prediction.r_squared_perturbed),
                         prediction.r_squared_perturbed, tol))

    correlation = float(np.corrcoef(data.y, y_released)[0, 1])
    checks.append(_check("correlation", prediction.correlation, correlation,
                         abs(correlation - prediction.correlation), abs(prediction.correlation), tol))

    report = VerificationReport(a=spec.a, b=spec.b, r_squared_original=original.r_squared, tol=tol, checks=checks)
    if not report.passed:
        failed = ", ".join(check.quantity for check in checks if not check.passed)
        logger.warning(f"Release does not match theory at tol={tol}: {failed}")
    return report
