"""
Sidecar metadata written next to every perturbed release.

Flat key=value text, one pair per line, read back with python-dotenv. The
random direction is never written. The seed regenerates it, so only
`seed_present` is recorded unless the caller asks to disclose the seed.
"""
import logging

from dotenv import dotenv_values

from app.data.files import write_text
from app.errors import InvalidParameters, ParseError
from app.noise.engine import NoiseSpec, PerturbedRelease
from app.regression import Dataset, RegressionFit

logger = logging.getLogger(__name__)

FORMAT = "regression-perturbation-sidecar/1"
STANDARD = "standard"
REDUCED_ACCURACY = "reduced_accuracy"


def release_metadata(data: Dataset, original: RegressionFit, release: PerturbedRelease,
                     mode: str = STANDARD, disclose_seed: bool = False) -> dict[str, str]:
    """Metadata enough to verify the release against the original data."""
    spec = release.spec
    metadata = {
        "format": FORMAT,
        "response": data.response_name,
        "rows": str(data.n),
        "mode": mode,
        "a": repr(spec.a),
        "b": repr(spec.b),
        # b = 0 draws nothing, so there is no seed to keep secret
        "seed_present": str(spec.b > 0).lower(),
    }
    if disclose_seed:
        metadata["seed"] = str(spec.seed)
    metadata.update({
        "positivity_enforced": str(release.positivity_enforced).lower(),
        "max_retries": str(spec.max_retries),
        "retries_used": str(release.retries_used),
        "rounded": str(release.rounded).lower(),
        "r_squared_original": repr(original.r_squared),
        "r_squared_achieved": repr(release.achieved_r_squared),
        "correlation": repr(release.correlation_with_original),
    })
    for j, name in enumerate(data.column_names):
        metadata[f"column.{j}"] = name
        metadata[f"beta.{j}"] = repr(float(release.achieved_beta[j]))
        metadata[f"t_value.{j}"] = repr(float(release.achieved_t_values[j]))
    return metadata


def write_sidecar(path, metadata: dict[str, str]) -> None:
    write_text(path, "".join(f"{key}={value}\n" for key, value in metadata.items()))


def read_sidecar(path) -> dict[str, str]:
    metadata = dotenv_values(path)
    if metadata.get("format") != FORMAT:
        raise ParseError(f"'{path}' is not a release sidecar (format={metadata.get('format')!r})")
    return {key: value for key, value in metadata.items() if value is not None}


def _number(metadata: dict[str, str], key: str) -> float:
    try:
        return float(metadata[key])
    except (KeyError, ValueError) as e:
        raise ParseError(f"sidecar key '{key}' is missing or not a number") from e


def _integer(metadata: dict[str, str], key: str) -> int:
    try:
        return int(metadata[key])
    except (KeyError, ValueError) as e:
        raise ParseError(f"sidecar key '{key}' is missing or not an integer") from e


def spec_from_sidecar(metadata: dict[str, str]) -> NoiseSpec:
    """NoiseSpec recorded in a sidecar; seed 0 stands in when it was not disclosed."""
    return NoiseSpec.create(
        a=_number(metadata, "a"),
        b=_number(metadata, "b"),
        seed=_integer(metadata, "seed") if "seed" in metadata else 0,
        positivity_required=metadata.get("positivity_enforced") == "true",
        max_retries=_integer(metadata, "max_retries"),
    )


def reduced_statistics(metadata: dict[str, str]) -> tuple[list[str], list[float], float]:
    """Column names, t-values and R^2 of a reduced-accuracy release."""
    if metadata.get("mode") != REDUCED_ACCURACY:
        raise InvalidParameters(f"sidecar describes a '{metadata.get('mode')}' release, not a reduced-accuracy one")
    names, t_values = [], []
    j = 0
    while f"column.{j}" in metadata:
        names.append(metadata[f"column.{j}"])
        t_values.append(_number(metadata, f"t_value.{j}"))
        j += 1
    return names, t_values, _number(metadata, "r_squared_achieved")
