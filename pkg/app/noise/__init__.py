from app.noise.engine import (
    NoiseSpec,
    PerturbedRelease,
    describe_release,
    draw_direction,
    make_noise,
    noise_for_fit,
    orthogonalize,
    perturb,
    round_release,
)
from app.noise.quasi import correlation_matrix, generate_quasi_responses, summary_statistics

__all__ = [
    "NoiseSpec",
    "PerturbedRelease",
    "describe_release",
    "draw_direction",
    "make_noise",
    "noise_for_fit",
    "orthogonalize",
    "perturb",
    "round_release",
    "correlation_matrix",
    "generate_quasi_responses",
    "summary_statistics",
]
