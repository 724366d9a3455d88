import argparse
import logging

from app.commands.base import check_digits
from app.data.csv_io import write_csv
from app.data.synthetic import SynthSpec, describe, generate_synthetic

logger = logging.getLogger(__name__)


def add_synth_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('output', help='CSV file to write')
    parser.add_argument('--n', type=int, default=1320, help='number of rows')
    parser.add_argument('--r2', type=float, default=0.78, help='target R^2 of the generated response')
    parser.add_argument('--error-scale', type=float, help='fixed error s.d.; overrides --r2 calibration')
    parser.add_argument('--seed', type=int, default=0)
    parser.add_argument('--positivity-outlier', action='store_true',
                        help='append a row whose released price goes negative for a = -2 and small b')
    parser.add_argument('--describe', action='store_true', help='print min/max/mean/s.d. per column')
    parser.add_argument('--digits', type=int, help='significant digits written (default OUTPUT_DIGITS)')


def cmd_synth(args: argparse.Namespace) -> int:
    """Write a synthetic housing dataset shaped by the published variable statistics."""
    digits = check_digits(args.digits)
    spec = SynthSpec.create(
        n=args.n,
        target_r_squared=args.r2,
        error_scale=args.error_scale,
        seed=args.seed,
        positivity_outlier=args.positivity_outlier,
    )
    data = generate_synthetic(spec)
    write_csv(data, args.output, digits)
    if args.describe:
        print(describe(data).to_csv(float_format='%.6g', lineterminator='\n'), end='')
    return 0
