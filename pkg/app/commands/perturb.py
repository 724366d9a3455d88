import argparse
import logging

from app.commands.base import add_schema_arguments, check_digits, fit_lines, load_dataset, print_key_values
from app.data.csv_io import write_release_csv
from app.data.files import atomic_outputs
from app.data.sidecar import REDUCED_ACCURACY, STANDARD, release_metadata, write_sidecar
from app.noise.engine import NoiseSpec, perturb, round_release
from app.regression import fit_ols

logger = logging.getLogger(__name__)

SIDECAR_SUFFIX = '.meta'
POSITIVITY_CHOICES = {'auto': None, 'required': True, 'off': False}


def add_noise_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--a', type=float, help='noise multiplier a (default NOISE_A)')
    parser.add_argument('--b', type=float, help='orthogonal weight b >= 0 (default NOISE_B)')
    parser.add_argument('--seed', type=int, default=0, help='root seed of the random direction')
    parser.add_argument('--positivity', choices=list(POSITIVITY_CHOICES), default='auto',
                        help='redraw until every released value is positive; auto = when all y > 0')
    parser.add_argument('--max-retries', type=int, help='redraws allowed (default NOISE_MAX_RETRIES)')


def add_perturb_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('input', help='original CSV')
    parser.add_argument('output', help='perturbed CSV to write')
    add_schema_arguments(parser)
    add_noise_arguments(parser)
    parser.add_argument('--reduced-accuracy', action='store_true',
                        help='use a = -1 +/- sqrt(b+2): t-values scaled by 1/sqrt(2)')
    parser.add_argument('--root', choices=['+', '-'], default='+', help='root of a in reduced-accuracy mode')
    parser.add_argument('--round-integer', action='store_true',
                        help='round released values to integers (breaks exact invariance)')
    parser.add_argument('--digits', type=int, help='significant digits written (default OUTPUT_DIGITS)')
    parser.add_argument('--sidecar', help=f'metadata file (default OUTPUT{SIDECAR_SUFFIX})')
    parser.add_argument('--disclose-seed', action='store_true',
                        help='write the seed to the sidecar; the seed regenerates the noise')


def noise_spec_from_args(args: argparse.Namespace) -> NoiseSpec:
    return NoiseSpec.create(
        a=args.a,
        b=args.b,
        seed=args.seed,
        positivity_required=POSITIVITY_CHOICES[args.positivity],
        max_retries=args.max_retries,
    )


def cmd_perturb(args: argparse.Namespace) -> int:
    """Write the perturbed CSV and its sidecar."""
    digits = check_digits(args.digits)
    table, data = load_dataset(args.input, args)

    if args.reduced_accuracy:
        spec = NoiseSpec.reduced_accuracy(
            args.b, seed=args.seed, root=args.root,
            positivity_required=POSITIVITY_CHOICES[args.positivity],
            max_retries=args.max_retries,
        )
        mode = REDUCED_ACCURACY
        logger.info(f"Reduced-accuracy mode: a={spec.a!r} for b={spec.b!r}")
    else:
        spec = noise_spec_from_args(args)
        mode = STANDARD

    release = perturb(data, spec)
    if args.round_integer:
        release = round_release(data, release, 0)

    metadata = release_metadata(data, fit_ols(data), release, mode, args.disclose_seed)
    # release and sidecar land together or not at all
    with atomic_outputs(args.output, args.sidecar or f"{args.output}{SIDECAR_SUFFIX}") as (release_tmp, sidecar_tmp):
        write_release_csv(table, data.response_name, release.y_perturbed, release_tmp, digits, args.round_integer)
        write_sidecar(sidecar_tmp, metadata)

    print_key_values([
        ('rows', data.n),
        ('mode', mode),
        ('retries_used', release.retries_used),
        ('min_value', repr(release.min_value)),
        ('r_squared', repr(release.achieved_r_squared)),
        ('correlation', repr(release.correlation_with_original)),
        *fit_lines(data, release.achieved_beta, release.achieved_t_values),
    ])
    return 0
