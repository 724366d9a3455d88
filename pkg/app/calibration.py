"""
Monte-Carlo choice of b: for every (b, q) cell draw `trials` random
subsamples of size floor(q n), perturb the response, and Chow-test the
regression on the original response against the one on the perturbed
response. The acceptance rate per cell and the smallest b whose rate reaches
1 - alpha for every q give the recommended b.

Every draw comes from a stream keyed by (master_seed, b_index, q_index,
trial, ...), see app.noise.streams, so cells are independent and the report
does not depend on the number of workers.
"""
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from pydantic import BaseModel, ConfigDict, Field, PositiveInt, ValidationError, field_validator

from app.chow import chow_test_shared_design, f_quantile
from app.errors import (
    ConstantResponse,
    InsufficientData,
    InvalidParameters,
    NoAdequateB,
    PerturbationError,
    RankDeficient,
)
from app.noise.engine import NoiseSpec, noise_for_fit
from app.noise.streams import MAX_SEED, NOISE, SHARED_SUBSAMPLE, SUBSAMPLE, stream
from app.regression import Dataset, RegressionFit, fit_ols, qr_factor

logger = logging.getLogger(__name__)

DEFAULT_Q_GRID = (0.05, 0.10, 0.20, 0.30, 0.40, 0.50, 0.60, 0.70, 0.80, 0.90)
DEFAULT_B_GRID = (0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.1, 1.2, 1.3, 1.4, 1.5, 2.0, 2.5)
PERCENTILES = (5, 10, 50, 90, 95)
MAX_SUBSAMPLE_REDRAWS = 100


class CalibrationPlan(BaseModel):
    model_config = ConfigDict(frozen=True)

    q_grid: tuple[float, ...] = DEFAULT_Q_GRID
    b_grid: tuple[float, ...] = DEFAULT_B_GRID
    trials: PositiveInt = 1000
    alpha: float = Field(0.05, gt=0, lt=1)
    a: float = Field(-2.0, allow_inf_nan=False)
    master_seed: int = Field(0, ge=0, le=MAX_SEED)
    # perturb the whole dataset once per trial and subsample afterwards
    perturb_full_data: bool = False
    # reuse the same subsample for every b at a given (q, trial)
    shared_subsamples: bool = False
    positivity_required: bool = False
    max_retries: PositiveInt = 100

    @field_validator("q_grid")
    @classmethod
    def _q_in_unit_interval(cls, values: tuple) -> tuple:
        if not values or any(not 0 < q <= 1 for q in values):
            raise ValueError("q values must lie in (0, 1]")
        return tuple(sorted(set(values)))

    @field_validator("b_grid")
    @classmethod
    def _b_nonnegative(cls, values: tuple) -> tuple:
        if not values or any(not (math.isfinite(b) and b >= 0) for b in values):
            raise ValueError("b values must be finite and >= 0")
        return tuple(sorted(set(values)))

    @field_validator("a")
    @classmethod
    def _a_nonzero(cls, value: float) -> float:
        if value == 0:
            raise ValueError("a must be nonzero")
        return value

    @classmethod
    def create(cls, **kwargs) -> "CalibrationPlan":
        try:
            return cls(**kwargs)
        except ValidationError as e:
            raise InvalidParameters(f"invalid calibration plan: {e.errors()[0]['msg']}") from e


def subsample_size(q: float, n: int) -> int:
    # tolerance keeps e.g. 0.7 * 1320 from flooring to 923
    return math.floor(q * n + 1e-9)


@dataclass(frozen=True)
class CellResult:
    b_index: int
    q_index: int
    f_values: np.ndarray
    accepted: int
    failures: dict
    redraws: int


@dataclass(frozen=True, eq=False)
class CalibrationReport:
    plan: CalibrationPlan
    n: int
    # rows b, columns q
    acceptance: pd.DataFrame
    # rows (b, q), columns p5..p95
    f_percentiles: pd.DataFrame
    failures: pd.DataFrame
    critical_values: dict
    b_star_per_q: dict
    recommended_b: Optional[float] = None
    subsample_redraws: int = 0
    failure_codes: dict = field(default_factory=dict)

    def acceptance_table(self, decimals: int = 3) -> str:
        """Rectangular text table, rows b and columns q."""
        table = self.acceptance.copy()
        table.index = [f"{b:g}" for b in table.index]
        table.columns = [f"{q:.2f}" for q in table.columns]
        return table.to_csv(float_format=f"%.{decimals}f", index_label="b\\q", lineterminator="\n")

    def percentile_table(self) -> str:
        table = self.f_percentiles.reset_index()
        return table.to_csv(index=False, float_format="%.6f", lineterminator="\n")


def _draw_rows(plan: CalibrationPlan, data: Dataset, size: int, b_index: int, q_index: int,
               trial: int) -> tuple[np.ndarray, int]:
    """Rows of a full-rank, non-constant subsample, with the number of redraws needed."""
    for redraw in range(MAX_SUBSAMPLE_REDRAWS):
        if plan.shared_subsamples:
            rng = stream(plan.master_seed, SHARED_SUBSAMPLE, q_index, trial, redraw)
        else:
            rng = stream(plan.master_seed, SUBSAMPLE, b_index, q_index, trial, redraw)
        rows = np.sort(rng.choice(data.n, size=size, replace=False))
        try:
            qr_factor(data.X[rows])
        except RankDeficient:
            continue
        if np.ptp(data.y[rows]) > 0:
            return rows, redraw
    raise RankDeficient(f"no full-rank subsample of size {size} in {MAX_SUBSAMPLE_REDRAWS} draws")


def _run_cell(data: Dataset, full_fit: Optional[RegressionFit], plan: CalibrationPlan, b_index: int,
              q_index: int, critical_value: float) -> CellResult:
    b = plan.b_grid[b_index]
    size = subsample_size(plan.q_grid[q_index], data.n)
    spec = NoiseSpec(a=plan.a, b=b, seed=plan.master_seed,
                     positivity_required=plan.positivity_required, max_retries=plan.max_retries)

    f_values = np.full(plan.trials, np.nan)
    accepted = 0
    redraws = 0
    failures = Counter()
    for trial in range(plan.trials):
        keys = (NOISE, b_index, q_index, trial)
        try:
            rows, used = _draw_rows(plan, data, size, b_index, q_index, trial)
            redraws += used
            subsample = data.take(rows)
            if plan.perturb_full_data:
                noise, _ = noise_for_fit(full_fit, data, spec, keys)
                perturbed = data.y[rows] + noise[rows]
            else:
                noise, _ = noise_for_fit(fit_ols(subsample), subsample, spec, keys)
                perturbed = subsample.y + noise
            result = chow_test_shared_design(subsample.X, subsample.y, perturbed, critical_value)
        except PerturbationError as e:
            failures[e.code] += 1
            continue
        f_values[trial] = result.f_value
        accepted += result.accepted

    if failures:
        logger.warning(f"Cell b={b}, q={plan.q_grid[q_index]}: failed trials {dict(failures)}")
    logger.info(f"Cell b={b}, q={plan.q_grid[q_index]}: acceptance {accepted}/{plan.trials}")
    return CellResult(b_index, q_index, f_values, accepted, dict(failures), redraws)


def _percentiles(f_values: np.ndarray) -> list:
    finite = np.sort(f_values[~np.isnan(f_values)])
    if finite.size == 0:
        return [np.nan] * len(PERCENTILES)
    # k-th ordered value, e.g. the 50th of 1000 for 5%
    return list(np.percentile(finite, PERCENTILES, method="inverted_cdf"))


def run_calibration(data: Dataset, plan: CalibrationPlan, workers: int = 1) -> CalibrationReport:
    """Run every (b, q) cell of the plan and aggregate the acceptance grid."""
    k = data.p + 1
    critical_values = {}
    for q in plan.q_grid:
        size = subsample_size(q, data.n)
        if size <= 2 * k:
            raise InsufficientData(f"q={q} gives a subsample of {size} rows; need more than 2(p+1)={2 * k}")
        critical_values[q] = f_quantile(k, 2 * size - 2 * k, plan.alpha)

    full_fit = None
    if plan.perturb_full_data:
        full_fit = fit_ols(data)
        if full_fit.rss == 0:
            raise ConstantResponse("the full-data fit is exact; there is nothing to perturb along")

    cells = [(b_index, q_index) for b_index in range(len(plan.b_grid)) for q_index in range(len(plan.q_grid))]
    logger.info(f"Calibrating {len(cells)} cells x {plan.trials} trials on n={data.n}, p={data.p}, "
                f"workers={workers}")
    if workers == 1:
        results = [_run_cell(data, full_fit, plan, b_index, q_index, critical_values[plan.q_grid[q_index]])
                   for b_index, q_index in cells]
    else:
        results = Parallel(n_jobs=workers)(
            delayed(_run_cell)(data, full_fit, plan, b_index, q_index, critical_values[plan.q_grid[q_index]])
            for b_index, q_index in cells
        )
    results = sorted(results, key=lambda cell: (cell.b_index, cell.q_index))
    return _aggregate(data, plan, results, critical_values)


def _aggregate(data: Dataset, plan: CalibrationPlan, results: list, critical_values: dict) -> CalibrationReport:
    acceptance = pd.DataFrame(index=pd.Index(plan.b_grid, name="b"),
                              columns=pd.Index(plan.q_grid, name="q"), dtype=float)
    failures = pd.DataFrame(0, index=acceptance.index, columns=acceptance.columns, dtype=int)
    percentile_rows = []
    failure_codes = Counter()
    redraws = 0
    for cell in results:
        b, q = plan.b_grid[cell.b_index], plan.q_grid[cell.q_index]
        acceptance.loc[b, q] = cell.accepted / plan.trials
        failures.loc[b, q] = sum(cell.failures.values())
        failure_codes.update(cell.failures)
        redraws += cell.redraws
        percentile_rows.append([b, q, *_percentiles(cell.f_values)])

    f_percentiles = pd.DataFrame(percentile_rows, columns=["b", "q", *[f"p{p}" for p in PERCENTILES]])
    f_percentiles = f_percentiles.set_index(["b", "q"])

    threshold = 1 - plan.alpha - 1e-12
    b_star_per_q = {}
    for q in plan.q_grid:
        passing = [b for b in plan.b_grid if acceptance.loc[b, q] >= threshold]
        b_star_per_q[q] = passing[0] if passing else None

    report = CalibrationReport(
        plan=plan,
        n=data.n,
        acceptance=acceptance,
        f_percentiles=f_percentiles,
        failures=failures,
        critical_values=critical_values,
        b_star_per_q=b_star_per_q,
        subsample_redraws=redraws,
        failure_codes=dict(failure_codes),
    )
    try:
        recommended = recommend_b(report)
    except NoAdequateB as e:
        logger.warning(f"No recommended b: {e}")
        return report
    return CalibrationReport(**{**report.__dict__, "recommended_b": recommended})


def recommend_b(report: CalibrationReport) -> float:
    """Largest per-q critical b, i.e. the smallest grid b adequate for every examined q."""
    if not report.b_star_per_q:
        raise InvalidParameters("calibration report has no q values")
    missing = [q for q, b in report.b_star_per_q.items() if b is None]
    if missing:
        raise NoAdequateB(f"no grid b reaches acceptance >= {1 - report.plan.alpha:g} for q={missing}")
    return max(report.b_star_per_q.values())
