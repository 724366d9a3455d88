import logging

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
from pandas.plotting import scatter_matrix

from app.calibration import PERCENTILES, CalibrationReport
from app.data.files import atomic_output
from app.errors import InvalidParameters
from app.noise.engine import PerturbedRelease
from app.noise.quasi import response_sets
from app.regression import Dataset

logger = logging.getLogger(__name__)


def _save(path) -> None:
    with atomic_output(path) as tmp:
        plt.savefig(tmp, format="png", dpi=300, bbox_inches="tight")
    plt.close()


def plot_f_percentiles(report: CalibrationReport, q: float, path) -> None:
    """
    F-value percentiles against b for one subsample fraction, with the
    critical value of the Chow test drawn as a horizontal line.
    """
    if q not in report.critical_values:
        raise InvalidParameters(f"q={q} is not on the calibration grid {list(report.critical_values)}")
    table = report.f_percentiles.xs(q, level="q")

    plt.figure(figsize=(10, 6))
    for p in PERCENTILES:
        plt.plot(table.index, table[f"p{p}"], marker="o", label=f"{p}%")
    plt.axhline(report.critical_values[q], color="black", linestyle="--", label="critical value")

    # Customize appearance
    plt.title(f"F value by b (q = {q:g}, {report.plan.trials} trials)", pad=20, fontsize=14)
    plt.xlabel("b", fontsize=12, labelpad=10)
    plt.ylabel("F value", fontsize=12, labelpad=10)
    plt.legend(loc="upper right", fontsize=10)
    plt.grid(axis="y", linestyle="--", alpha=0.7)
    plt.tight_layout()

    _save(path)
    logger.info(f"F percentile chart for q={q} written to {path}")


def plot_quasi_boxplot(data: Dataset, releases: list[PerturbedRelease], path) -> None:
    """Boxplots of the original response and each quasi response."""
    sets = response_sets(data, releases)

    plt.figure(figsize=(10, 6))
    plt.boxplot([sets[label] for label in sets.columns], tick_labels=list(sets.columns))

    plt.title(f"Original and quasi '{data.response_name}'", pad=20, fontsize=14)
    plt.ylabel(data.response_name, fontsize=12, labelpad=10)
    plt.grid(axis="y", linestyle="--", alpha=0.7)
    plt.tight_layout()

    _save(path)
    logger.info(f"Boxplot of {len(releases)} quasi responses written to {path}")


def plot_quasi_scatter(data: Dataset, releases: list[PerturbedRelease], path) -> None:
    """Pairwise scatterplots of the original response and each quasi response."""
    sets = response_sets(data, releases)
    side = 2.5 * len(sets.columns)
    scatter_matrix(sets, figsize=(side, side), alpha=0.4, diagonal="hist", marker=".")
    plt.suptitle(f"Original and quasi '{data.response_name}', pairwise", fontsize=14)

    _save(path)
    logger.info(f"Scatterplot matrix of {len(releases)} quasi responses written to {path}")
