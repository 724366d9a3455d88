"""
Synthetic hedonic housing data.

Explanatory columns are independent draws: continuous columns from normals
truncated to [minimum, maximum] whose location and scale are solved so the
truncated distribution has the target mean and s.d., dummies from Bernoulli
trials. The response is X beta plus a Gaussian error truncated to the
response range, with the error scale found by bisection so the fitted R^2
hits the target.
"""
import logging
import math
from typing import Literal, Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, PositiveInt, ValidationError, model_validator
from scipy.optimize import least_squares
from scipy.stats import truncnorm

from app.errors import InvalidSpec
from app.noise.streams import MAX_SEED, SYNTH, stream
from app.regression import Dataset, fit_ols

logger = logging.getLogger(__name__)

MOMENT_TOLERANCE = 0.05
R2_TOLERANCE = 1e-4
MAX_BISECTIONS = 100
MAX_DUMMY_REDRAWS = 100


class ColumnTarget(BaseModel):
    """Published range and moments of one variable, plus its standardized effect on the response."""
    model_config = ConfigDict(frozen=True)

    name: str = Field(min_length=1)
    kind: Literal["continuous", "dummy"] = "continuous"
    minimum: float
    maximum: float
    mean: float
    sd: float = Field(gt=0)
    effect: float = 0.0

    @model_validator(mode="after")
    def _consistent(self) -> "ColumnTarget":
        if not self.minimum < self.mean < self.maximum:
            raise ValueError(f"{self.name}: mean must lie strictly inside [minimum, maximum]")
        return self


HOUSING_RESPONSE = ColumnTarget(name="price", minimum=34_800_000, maximum=330_000_000,
                                mean=72_431_491, sd=25_539_447)

HOUSING_COLUMNS = (
    ColumnTarget(name="station_minutes", minimum=0, maximum=25, mean=10.60, sd=4.83, effect=-0.30),
    ColumnTarget(name="bus", kind="dummy", minimum=0, maximum=1, mean=0.07, sd=0.26, effect=-0.10),
    ColumnTarget(name="site_area", minimum=29.53, maximum=211.49, mean=88.56, sd=25.48, effect=0.60),
    ColumnTarget(name="floor_area", minimum=47.07, maximum=228.48, mean=98.94, sd=20.06, effect=0.40),
    ColumnTarget(name="leased_land", kind="dummy", minimum=0, maximum=1, mean=0.03, sd=0.17, effect=-0.10),
    ColumnTarget(name="coverage_ratio", minimum=40, maximum=80, mean=54.18, sd=7.70, effect=-0.05),
    ColumnTarget(name="floor_area_ratio", minimum=80, maximum=300, mean=141.43, sd=47.10, effect=0.15),
    ColumnTarget(name="shinjuku_minutes", minimum=5, maximum=32, mean=18.72, sd=5.29, effect=-0.20),
    ColumnTarget(name="shibuya_minutes", minimum=3, maximum=29, mean=14.86, sd=6.01, effect=-0.20),
    ColumnTarget(name="yokohama_minutes", minimum=17, maximum=64, mean=44.30, sd=10.99, effect=-0.10),
    ColumnTarget(name="tokyo_minutes", minimum=23, maximum=48, mean=34.09, sd=4.90, effect=-0.10),
    ColumnTarget(name="road_width", minimum=4.5, maximum=35, mean=5.80, sd=2.25, effect=0.10),
    ColumnTarget(name="south_road", kind="dummy", minimum=0, maximum=1, mean=0.28, sd=0.45, effect=0.10),
)


class SynthSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: PositiveInt = 1320
    columns: tuple[ColumnTarget, ...] = HOUSING_COLUMNS
    response: ColumnTarget = HOUSING_RESPONSE
    # raw beta including the intercept; derived from the column effects when omitted
    coefficients: Optional[tuple[float, ...]] = None
    target_r_squared: Optional[float] = Field(0.78, gt=0, lt=1)
    # fixed error scale; overrides target_r_squared
    error_scale: Optional[float] = Field(None, ge=0, allow_inf_nan=False)
    seed: int = Field(0, ge=0, le=MAX_SEED)
    positivity_outlier: bool = False

    @model_validator(mode="after")
    def _consistent(self) -> "SynthSpec":
        if not self.columns:
            raise ValueError("at least one explanatory column is required")
        if self.n <= len(self.columns) + 1:
            raise ValueError(f"n={self.n} must exceed the number of design columns {len(self.columns) + 1}")
        if self.coefficients is not None and len(self.coefficients) != len(self.columns) + 1:
            raise ValueError(f"{len(self.coefficients)} coefficients for {len(self.columns) + 1} design columns")
        if self.target_r_squared is None and self.error_scale is None:
            raise ValueError("either target_r_squared or error_scale is required")
        for column in self.columns:
            if column.kind == "dummy" and not 0 < column.mean < 1:
                raise ValueError(f"{column.name}: dummy rate must lie in (0, 1)")
        return self

    @classmethod
    def create(cls, **kwargs) -> "SynthSpec":
        try:
            return cls(**kwargs)
        except ValidationError as e:
            raise InvalidSpec(f"invalid synthetic spec: {e.errors()[0]['msg']}") from e


def truncated_normal_params(target: ColumnTarget) -> tuple[float, float]:
    """Location and scale of the normal whose truncation to [min, max] has the target mean and s.d."""
    low, high = target.minimum, target.maximum

    def gaps(params):
        loc, log_scale = params
        scale = math.exp(log_scale)
        mean, var = truncnorm.stats((low - loc) / scale, (high - loc) / scale, loc=loc, scale=scale, moments="mv")
        return [(mean - target.mean) / target.sd, (math.sqrt(var) - target.sd) / target.sd]

    width = high - low
    bounds = ([low - 10 * width, math.log(target.sd) - 5], [high + 10 * width, math.log(target.sd) + 5])
    solution = least_squares(gaps, x0=[target.mean, math.log(target.sd)], bounds=bounds)
    loc, scale = float(solution.x[0]), math.exp(solution.x[1])
    if max(abs(g) for g in solution.fun) > 1e-3:
        logger.warning(f"Column '{target.name}': no truncated normal on [{low}, {high}] matches "
                       f"mean {target.mean} and s.d. {target.sd}; using the closest one")
    return loc, scale


def _draw_column(target: ColumnTarget, n: int, rng: np.random.Generator) -> np.ndarray:
    if target.kind == "dummy":
        for _ in range(MAX_DUMMY_REDRAWS):
            values = (rng.random(n) < target.mean).astype(float)
            # a constant dummy would make the design rank deficient
            if 0 < values.sum() < n:
                return values
        raise InvalidSpec(f"dummy '{target.name}' with rate {target.mean} stays constant for n={n}")

    loc, scale = truncated_normal_params(target)
    low, high = (target.minimum - loc) / scale, (target.maximum - loc) / scale
    return truncnorm.rvs(low, high, loc=loc, scale=scale, size=n, random_state=rng)


def _coefficients(spec: SynthSpec, features: np.ndarray) -> np.ndarray:
    if spec.coefficients is not None:
        return np.asarray(spec.coefficients, dtype=float)

    effects = np.array([column.effect for column in spec.columns])
    means = np.array([column.mean for column in spec.columns])
    sds = np.array([column.sd for column in spec.columns])
    signal = ((features - means) / sds) @ effects
    spread = float(np.std(signal))
    if spread == 0:
        raise InvalidSpec("every column effect is zero; the response would carry no signal")
    # systematic part explains the target share of the response variance
    share = spec.target_r_squared if spec.target_r_squared is not None else 0.5
    slopes = effects / sds * (math.sqrt(share) * spec.response.sd / spread)
    intercept = spec.response.mean - float(slopes @ means)
    return np.concatenate([[intercept], slopes])


def _errors(signal: np.ndarray, uniforms: np.ndarray, scale: float, response: ColumnTarget) -> np.ndarray:
    if scale == 0:
        return np.zeros_like(signal)
    low = (response.minimum - signal) / scale
    high = (response.maximum - signal) / scale
    return scale * truncnorm.ppf(uniforms, low, high)


def _error_scale_for(spec: SynthSpec, X: np.ndarray, signal: np.ndarray, uniforms: np.ndarray,
                     names: tuple) -> float:
    """Bisection on the error scale until the fitted R^2 is within R2_TOLERANCE of the target."""

    def r_squared(scale: float) -> float:
        y = signal + _errors(signal, uniforms, scale, spec.response)
        return fit_ols(Dataset(X, y, names, spec.response.name)).r_squared

    target = spec.target_r_squared
    low, high = 0.0, spec.response.sd
    while r_squared(high) > target:
        high *= 2
        if high > 1e6 * spec.response.sd:
            raise InvalidSpec(f"no error scale brings R^2 down to {target}")
    for _ in range(MAX_BISECTIONS):
        middle = (low + high) / 2
        achieved = r_squared(middle)
        if abs(achieved - target) <= R2_TOLERANCE:
            return middle
        if achieved > target:
            low = middle
        else:
            high = middle
    return (low + high) / 2


def _append_positivity_outlier(data: Dataset, spec: SynthSpec) -> Dataset:
    """
    Copy the row with the lowest fitted value and give it a price above twice that value.

    y_i > 2 y_hat_i makes y_hat_i - e_i negative, the case where a = -2 with
    small b produces a negative released price.
    """
    fit = fit_ols(data)
    row = int(np.argmin(fit.y_hat))
    price = max(2 * fit.y_hat[row], 0.0) + spec.response.sd
    X = np.vstack([data.X, data.X[row]])
    y = np.append(data.y, price)
    logger.info(f"Appended a positivity outlier copying row {row}: fitted {fit.y_hat[row]:.6g}, price {price:.6g}")
    return Dataset(X, y, data.column_names, data.response_name)


def generate_synthetic(spec: SynthSpec) -> Dataset:
    """Draw a dataset shaped by the column targets with a response at the target R^2."""
    p = len(spec.columns)
    features = np.column_stack([_draw_column(column, spec.n, stream(spec.seed, SYNTH, j))
                                for j, column in enumerate(spec.columns)])
    names = tuple(column.name for column in spec.columns)
    data = Dataset.with_intercept(features, np.zeros(spec.n), names, spec.response.name)

    beta = _coefficients(spec, features)
    signal = data.X @ beta
    uniforms = stream(spec.seed, SYNTH, p).random(spec.n)
    if spec.error_scale is not None:
        scale = spec.error_scale
    else:
        scale = _error_scale_for(spec, data.X, signal, uniforms, data.column_names)

    data = data.with_response(signal + _errors(signal, uniforms, scale, spec.response))
    if spec.positivity_outlier:
        data = _append_positivity_outlier(data, spec)

    if spec.n >= 1000:
        gaps = moment_gaps(data, spec)
        off = gaps.index[(gaps["mean"] > MOMENT_TOLERANCE) | (gaps["sd"] > MOMENT_TOLERANCE)].tolist()
        if off:
            logger.warning(f"Columns {off} miss their target mean or s.d. by more than {MOMENT_TOLERANCE:.0%}")
    logger.info(f"Generated synthetic dataset: n={data.n}, p={data.p}, error scale {scale:.6g}")
    return data


def describe(data: Dataset) -> pd.DataFrame:
    """Min, max, mean and s.d. of every explanatory column and the response."""
    frame = pd.DataFrame(data.X[:, 1:], columns=list(data.column_names[1:]))
    frame[data.response_name] = data.y
    summary = pd.DataFrame({
        "min": frame.min(),
        "max": frame.max(),
        "mean": frame.mean(),
        "sd": frame.std(ddof=1),
    })
    summary.index.name = "column"
    return summary


def moment_gaps(data: Dataset, spec: SynthSpec) -> pd.DataFrame:
    """Relative gap between realized and target mean and s.d., per column."""
    summary = describe(data)
    targets = {column.name: column for column in (*spec.columns, spec.response)}
    rows = {
        name: {
            "mean": abs(summary.loc[name, "mean"] - target.mean) / (abs(target.mean) or target.sd),
            "sd": abs(summary.loc[name, "sd"] - target.sd) / target.sd,
        }
        for name, target in targets.items()
    }
    return pd.DataFrame.from_dict(rows, orient="index")
