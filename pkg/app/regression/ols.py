import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import solve_triangular

from app.errors import (
    ConstantResponse,
    DimensionMismatch,
    InsufficientData,
    RankDeficient,
    SchemaMismatch,
)

logger = logging.getLogger(__name__)

INTERCEPT = "intercept"


def _frozen(values, ndim: int) -> np.ndarray:
    array = np.array(values, dtype=float, copy=True)
    if array.ndim != ndim:
        raise DimensionMismatch(f"expected a {ndim}-d array, got shape {array.shape}")
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class Dataset:
    """
    Design matrix with a leading intercept column plus a response vector.

    X is n x (p+1) and its first column is exactly the ones vector.
    Arrays are copied and made read-only on construction.
    """
    X: np.ndarray
    y: np.ndarray
    column_names: tuple
    response_name: str

    def __post_init__(self):
        X = _frozen(self.X, 2)
        y = _frozen(self.y, 1)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "column_names", tuple(self.column_names))

        n, k = X.shape
        if y.shape[0] != n:
            raise DimensionMismatch(f"X has {n} rows but y has {y.shape[0]} entries")
        if len(self.column_names) != k:
            raise DimensionMismatch(f"{len(self.column_names)} column names for {k} design columns")
        if k == 0 or not np.array_equal(X[:, 0], np.ones(n)):
            raise SchemaMismatch("first design column must be the intercept (all ones)")
        if n <= k:
            raise InsufficientData(f"need more rows than design columns, got n={n}, p+1={k}")

    @classmethod
    def with_intercept(cls, features, y, feature_names: Sequence[str], response_name: str) -> "Dataset":
        """Build a dataset from explanatory columns, prepending the ones column."""
        features = np.asarray(features, dtype=float)
        if features.ndim == 1:
            features = features[:, None]
        X = np.column_stack([np.ones(features.shape[0]), features])
        return cls(X, y, (INTERCEPT, *feature_names), response_name)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        """Number of explanatory variables, intercept excluded."""
        return self.X.shape[1] - 1

    def with_response(self, y) -> "Dataset":
        return Dataset(self.X, y, self.column_names, self.response_name)

    def take(self, rows) -> "Dataset":
        """Subsample of the given row indices, order kept."""
        rows = np.asarray(rows)
        return Dataset(self.X[rows], self.y[rows], self.column_names, self.response_name)


@dataclass(frozen=True, eq=False)
class RegressionFit:
    beta_hat: np.ndarray
    y_hat: np.ndarray
    residual: np.ndarray
    rss: float
    tss: float
    r_squared: float
    t_values: np.ndarray
    xtx_inv_diag: np.ndarray
    y_bar: float
    # orthonormal basis of the column space of X, used to apply the residual-maker
    basis: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.residual.shape[0]

    @property
    def df_resid(self) -> int:
        return self.n - self.beta_hat.shape[0]

    @property
    def residual_norm(self) -> float:
        return float(np.sqrt(self.rss))


def qr_factor(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """
    Reduced QR of the design with a rank test on the diagonal of R.

    Raises RankDeficient when min|R_jj| < n * eps * max|R_jj|.
    """
    Q, R = np.linalg.qr(X, mode="reduced")
    diag = np.abs(np.diag(R))
    n = X.shape[0]
    if diag.size == 0 or diag.min() < n * np.finfo(float).eps * diag.max():
        raise RankDeficient(f"design matrix of shape {X.shape} is numerically rank deficient")
    return Q, R


def fit_ols(data: Dataset) -> RegressionFit:
    """Fit y on X by least squares through a QR factorization."""
    X, y = data.X, data.y
    if np.ptp(y) == 0:
        raise ConstantResponse(f"response '{data.response_name}' is constant")

    Q, R = qr_factor(X)
    qty = Q.T @ y
    beta_hat = solve_triangular(R, qty, lower=False)
    y_hat = Q @ qty
    residual = y - y_hat

    # diag((X'X)^-1) = row sums of squares of R^-1
    r_inv = solve_triangular(R, np.eye(R.shape[0]), lower=False)
    xtx_inv_diag = np.einsum("ij,ij->i", r_inv, r_inv)

    y_bar = float(np.mean(y))
    centered = y - y_bar
    tss = float(centered @ centered)
    rss = float(residual @ residual)
    # intercept-only fits have R^2 = 0 exactly; rss/tss can round past 1
    r_squared = 0.0 if R.shape[0] == 1 else float(np.clip(1.0 - rss / tss, 0.0, 1.0))

    df = data.n - R.shape[0]
    with np.errstate(divide="ignore", invalid="ignore"):
        t_values = np.sqrt(df) * beta_hat / (np.sqrt(xtx_inv_diag) * np.sqrt(rss))

    for array in (beta_hat, y_hat, residual, t_values, xtx_inv_diag, Q):
        array.setflags(write=False)
    logger.debug(f"OLS fit on n={data.n}, p={data.p}: R2={r_squared:.6f}, rss={rss:.6g}")

    return RegressionFit(
        beta_hat=beta_hat,
        y_hat=y_hat,
        residual=residual,
        rss=rss,
        tss=tss,
        r_squared=r_squared,
        t_values=t_values,
        xtx_inv_diag=xtx_inv_diag,
        y_bar=y_bar,
        basis=Q,
    )


def residual_projector_apply(fit: RegressionFit, data: Dataset, w) -> np.ndarray:
    """
    Apply the residual-maker I - X(X'X)^-1 X' to w.

    The n x n projector is never formed; w is projected off the QR basis.
    """
    w = np.asarray(w, dtype=float)
    if w.ndim != 1 or w.shape[0] != data.n or fit.n != data.n:
        raise DimensionMismatch(f"vector of shape {w.shape} does not match n={data.n}")
    Q = fit.basis
    return w - Q @ (Q.T @ w)


def residual_sum_of_squares(X: np.ndarray, y: np.ndarray) -> float:
    """RSS of the least-squares fit of y on X, with the same rank test as fit_ols."""
    Q, _ = qr_factor(X)
    residual = y - Q @ (Q.T @ y)
    return float(residual @ residual)
