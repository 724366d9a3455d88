import argparse
import logging

import numpy as np

from app.data.csv_io import build_schema, dataset_from_table, parse_column, read_table
from app.data.sidecar import read_sidecar, spec_from_sidecar
from app.errors import DimensionMismatch, SchemaMismatch
from app.noise.engine import describe_release
from app.regression import INTERCEPT
from app.theory import verify_release

logger = logging.getLogger(__name__)

EXIT_VERIFICATION_FAILED = 1


def add_verify_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('original', help='original CSV')
    parser.add_argument('release', help='perturbed CSV')
    parser.add_argument('sidecar', help='sidecar metadata written with the release')
    parser.add_argument('--tol', type=float, default=1e-9, help='relative tolerance of every check')


def _design_columns(metadata: dict[str, str]) -> list[str]:
    names = []
    j = 0
    while f"column.{j}" in metadata:
        names.append(metadata[f"column.{j}"])
        j += 1
    if not names or names[0] != INTERCEPT:
        raise SchemaMismatch("sidecar does not list the design columns")
    return names[1:]


def cmd_verify(args: argparse.Namespace) -> int:
    """Check a release against the predicted invariances; exits 1 when a check fails."""
    metadata = read_sidecar(args.sidecar)
    response = metadata.get('response', '')
    explanatory = _design_columns(metadata)

    table = read_table(args.original)
    ignored = [name for name in table.columns if name != response and name not in explanatory]
    data = dataset_from_table(table, build_schema(table.columns, response, ignored=ignored))

    released_table = read_table(args.release)
    if response not in released_table.columns:
        raise SchemaMismatch(f"release has no '{response}' column")
    y_released = parse_column(released_table[response].tolist(), response)
    if y_released.shape[0] != data.n:
        raise DimensionMismatch(f"release has {y_released.shape[0]} rows, original has {data.n}")

    if metadata.get('rounded') == 'true':
        logger.warning("Release was rounded; exact checks are expected to fail at tight tolerances")

    spec = spec_from_sidecar(metadata)
    release = describe_release(data, y_released, spec, int(metadata.get('retries_used', 0)),
                               positivity_enforced=metadata.get('positivity_enforced') == 'true',
                               rounded=metadata.get('rounded') == 'true')
    report = verify_release(data, release, args.tol)
    print(report.to_key_values(), end='')

    if not np.isclose(release.achieved_r_squared, float(metadata.get('r_squared_achieved', 'nan')), rtol=1e-9):
        logger.warning("R^2 recorded in the sidecar differs from the R^2 of the release file")
    return 0 if report.passed else EXIT_VERIFICATION_FAILED
