from app.regression.ols import (
    INTERCEPT,
    Dataset,
    RegressionFit,
    fit_ols,
    qr_factor,
    residual_projector_apply,
    residual_sum_of_squares,
)

__all__ = [
    "INTERCEPT",
    "Dataset",
    "RegressionFit",
    "fit_ols",
    "qr_factor",
    "residual_projector_apply",
    "residual_sum_of_squares",
]
