import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PositiveInt, ValidationError, field_validator

from app.errors import (
    DegenerateDirection,
    DegenerateFit,
    DimensionMismatch,
    InvalidParameters,
    PositivityUnachievable,
    ZeroDirection,
)
from app.noise.streams import MAX_SEED, stream
from app.regression import Dataset, RegressionFit, fit_ols, residual_projector_apply
from app.theory import reduced_accuracy_params

logger = logging.getLogger(__name__)

DEGENERACY_TOL = 1e-8


class NoiseSpec(BaseModel):
    """Full recipe for one perturbation: a, b, seed and the positivity policy."""
    model_config = ConfigDict(frozen=True)

    a: float = Field(-2.0, allow_inf_nan=False)
    b: float = Field(1.0, ge=0, allow_inf_nan=False)
    seed: int = Field(0, ge=0, le=MAX_SEED)
    # None means "required when every original response is positive"
    positivity_required: Optional[bool] = None
    max_retries: PositiveInt = 100

    @field_validator("a")
    @classmethod
    def _a_nonzero(cls, value: float) -> float:
        if value == 0:
            raise ValueError("a must be nonzero")
        return value

    @classmethod
    def create(cls, **kwargs) -> "NoiseSpec":
        """Construct a spec, reporting validation problems as InvalidParameters."""
        try:
            return cls(**kwargs)
        except ValidationError as e:
            raise InvalidParameters(f"invalid noise parameters: {e.errors()[0]['msg']}") from e

    @classmethod
    def reduced_accuracy(cls, b: float, seed: int = 0, root: str = "+", **kwargs) -> "NoiseSpec":
        """Spec with a = -1 +/- sqrt(b+2): t-values scaled by 1/sqrt(2)."""
        plus, minus = reduced_accuracy_params(b)
        if root not in ("+", "-"):
            raise InvalidParameters(f"root must be '+' or '-', got {root!r}")
        return cls.create(a=plus if root == "+" else minus, b=b, seed=seed, **kwargs)

    def positivity_for(self, y: np.ndarray) -> bool:
        if self.positivity_required is None:
            return bool(np.all(y > 0))
        return self.positivity_required


@dataclass(frozen=True, eq=False)
class PerturbedRelease:
    """y + eps with the diagnostics of a fresh fit on it. The direction v is never kept."""
    y_perturbed: np.ndarray
    spec: NoiseSpec
    retries_used: int
    achieved_beta: np.ndarray
    achieved_r_squared: float
    achieved_t_values: np.ndarray
    correlation_with_original: float
    positivity_enforced: bool = False
    rounded: bool = False

    @property
    def min_value(self) -> float:
        return float(np.min(self.y_perturbed))


def _check_ab(a: float, b: float) -> None:
    if not math.isfinite(a) or a == 0:
        raise InvalidParameters(f"a must be finite and nonzero, got {a}")
    if not math.isfinite(b) or b < 0:
        raise InvalidParameters(f"b must be finite and >= 0, got {b}")


def draw_direction(n: int, rng: np.random.Generator) -> np.ndarray:
    """n independent standard-normal draws from the given stream."""
    if n < 1:
        raise InvalidParameters(f"direction length must be positive, got {n}")
    return rng.standard_normal(n)


def orthogonalize(fit: RegressionFit, data: Dataset, v, tol: float = DEGENERACY_TOL) -> np.ndarray:
    """
    u = (I - X(X'X)^-1 X' - ee'/|e|^2) v, so that X'u = 0 and e'u = 0.

    Raises DegenerateDirection when |u| <= tol * |v|, i.e. v lies numerically
    in span{X, e}; callers draw a new v.
    """
    v = np.asarray(v, dtype=float)
    if fit.rss == 0:
        raise DegenerateFit("residual vector is zero; no direction orthogonal to it is defined")
    e_unit = fit.residual / fit.residual_norm

    u = v
    # second pass restores orthogonality lost to rounding
    for _ in range(2):
        u = residual_projector_apply(fit, data, u)
        u = u - e_unit * (e_unit @ u)

    if np.linalg.norm(u) <= tol * np.linalg.norm(v):
        raise DegenerateDirection("random direction lies in the span of the design and the residual")
    return u


def make_noise(fit: RegressionFit, u: Optional[np.ndarray], a: float, b: float) -> np.ndarray:
    """
    eps = (a|e|/(1+b)) * (e/|e| + sqrt(b) * u/|u|).

    With b = 0 the u term is dropped and eps = a*e; u may then be None.
    """
    _check_ab(a, b)
    e = fit.residual
    e_norm = fit.residual_norm
    if e_norm == 0:
        raise DegenerateFit("residual vector is zero; noise would be identically zero")
    if b == 0:
        return a * e

    if u is None:
        raise ZeroDirection("b > 0 needs a direction u")
    u = np.asarray(u, dtype=float)
    if u.shape != e.shape:
        raise DimensionMismatch(f"direction of shape {u.shape} does not match n={e.shape[0]}")
    u_norm = float(np.linalg.norm(u))
    if u_norm == 0:
        raise ZeroDirection("direction u is the zero vector")
    return (a * e_norm / (1 + b)) * (e / e_norm + math.sqrt(b) * u / u_norm)


def noise_for_fit(fit: RegressionFit, data: Dataset, spec: NoiseSpec, keys: tuple = ()) -> tuple[np.ndarray, int]:
    """
    Draw noise for an existing fit, honouring the retry and positivity policy.

    Attempt k draws v from stream(spec.seed, *keys, k). Returns the noise and
    the index of the accepted attempt.
    """
    positivity = spec.positivity_for(data.y)

    if spec.b == 0:
        noise = make_noise(fit, None, spec.a, 0.0)
        if positivity:
            low = float(np.min(data.y + noise))
            if low <= 0:
                # b = 0 has no randomness, a redraw cannot help
                raise PositivityUnachievable(low, 1)
        return noise, 0

    best_min = -math.inf
    degenerate = None
    for attempt in range(spec.max_retries + 1):
        v = draw_direction(data.n, stream(spec.seed, *keys, attempt))
        try:
            u = orthogonalize(fit, data, v)
        except DegenerateDirection as e:
            logger.warning(f"Attempt {attempt}: {e}, redrawing")
            degenerate = e
            continue

        noise = make_noise(fit, u, spec.a, spec.b)
        if not positivity:
            return noise, attempt

        low = float(np.min(data.y + noise))
        if low > 0:
            return noise, attempt
        best_min = max(best_min, low)
        logger.info(f"Attempt {attempt}: min(y+eps)={low:.6g} <= 0, redrawing")

    # every attempt was degenerate
    if degenerate is not None and (not positivity or best_min == -math.inf):
        raise degenerate
    raise PositivityUnachievable(best_min, spec.max_retries + 1)


def describe_release(data: Dataset, y_perturbed: np.ndarray, spec: NoiseSpec, retries_used: int,
                     positivity_enforced: bool = False, rounded: bool = False) -> PerturbedRelease:
    """Build a release with diagnostics from an independent fit on y_perturbed."""
    y_perturbed = np.array(y_perturbed, dtype=float)
    y_perturbed.setflags(write=False)
    refit = fit_ols(data.with_response(y_perturbed))
    correlation = float(np.corrcoef(data.y, y_perturbed)[0, 1])
    return PerturbedRelease(
        y_perturbed=y_perturbed,
        spec=spec,
        retries_used=retries_used,
        achieved_beta=refit.beta_hat,
        achieved_r_squared=refit.r_squared,
        achieved_t_values=refit.t_values,
        correlation_with_original=correlation,
        positivity_enforced=positivity_enforced,
        rounded=rounded,
    )


def perturb(data: Dataset, spec: NoiseSpec, keys: tuple = ()) -> PerturbedRelease:
    """Fit OLS, draw noise with the given parameters and return the perturbed release."""
    fit = fit_ols(data)
    if fit.rss == 0:
        raise DegenerateFit("the original fit is exact; there is no residual to perturb along")

    noise, retries = noise_for_fit(fit, data, spec, keys)
    logger.info(f"Perturbed '{data.response_name}' with a={spec.a}, b={spec.b} after {retries} retries")
    return describe_release(data, data.y + noise, spec, retries, positivity_enforced=spec.positivity_for(data.y))


def round_release(data: Dataset, release: PerturbedRelease, decimals: int = 0) -> PerturbedRelease:
    """
    Round the perturbed response and recompute diagnostics.

    Rounding breaks the exact invariances; the returned diagnostics describe
    the rounded values.
    """
    logger.warning(f"Rounding the release to {decimals} decimals; OLS invariance is no longer exact")
    rounded = np.round(release.y_perturbed, decimals)
    return describe_release(data, rounded, release.spec, release.retries_used,
                            positivity_enforced=release.positivity_enforced, rounded=True)
