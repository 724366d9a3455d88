import logging

import numpy as np
import pandas as pd

from app.errors import InvalidParameters
from app.noise.engine import NoiseSpec, PerturbedRelease, perturb
from app.noise.streams import QUASI
from app.regression import Dataset

logger = logging.getLogger(__name__)

ORIGINAL_LABEL = "original"


def quasi_labels(count: int) -> list[str]:
    return [ORIGINAL_LABEL, *[f"quasi{k}" for k in range(1, count + 1)]]


def generate_quasi_responses(data: Dataset, spec: NoiseSpec, count: int) -> list[PerturbedRelease]:
    """
    Several independent releases with the same (a, b).

    Release k draws its directions from the (spec.seed, QUASI, k) stream, so
    adding releases never changes the earlier ones.
    """
    if count < 1:
        raise InvalidParameters(f"count must be positive, got {count}")
    releases = [perturb(data, spec, keys=(QUASI, k)) for k in range(1, count + 1)]
    logger.info(f"Generated {count} quasi responses for '{data.response_name}'")
    return releases


def response_sets(data: Dataset, releases: list[PerturbedRelease]) -> pd.DataFrame:
    columns = [data.y, *[release.y_perturbed for release in releases]]
    return pd.DataFrame(np.column_stack(columns), columns=quasi_labels(len(releases)))


def correlation_matrix(data: Dataset, releases: list[PerturbedRelease]) -> pd.DataFrame:
    """Pearson correlations between the original response and every release."""
    return response_sets(data, releases).corr(method="pearson")


def summary_statistics(data: Dataset, releases: list[PerturbedRelease]) -> pd.DataFrame:
    """Min, quartiles, median, mean and max per set, one row per set."""
    sets = response_sets(data, releases)
    summary = pd.DataFrame({
        "min": sets.min(),
        "q1": sets.quantile(0.25),
        "median": sets.median(),
        "mean": sets.mean(),
        "q3": sets.quantile(0.75),
        "max": sets.max(),
    })
    summary.index.name = "set"
    return summary
