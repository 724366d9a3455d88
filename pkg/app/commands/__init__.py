import argparse
import logging
import sys
from typing import Callable, Sequence

from app.commands.base import CliParser, print_config, resolve_config
from app.commands.calibrate import add_calibrate_arguments, cmd_calibrate
from app.commands.chow import add_chow_arguments, cmd_chow
from app.commands.fit import add_fit_arguments, cmd_fit
from app.commands.perturb import add_perturb_arguments, cmd_perturb
from app.commands.quasi import add_quasi_arguments, cmd_quasi
from app.commands.synth import add_synth_arguments, cmd_synth
from app.commands.theory import add_restore_arguments, add_theory_table_arguments, cmd_restore, cmd_theory_table
from app.commands.verify import add_verify_arguments, cmd_verify
from app.errors import InvalidParameters, PerturbationError

logger = logging.getLogger(__name__)


def _register(subparsers, name: str, help_text: str, add_arguments: Callable, handler: Callable) -> None:
    parser = subparsers.add_parser(name, help=help_text, description=handler.__doc__)
    add_arguments(parser)
    parser.set_defaults(handler=handler)


def register_all_commands(subparsers) -> None:
    # Regression and release
    _register(subparsers, 'fit', 'OLS coefficients, t-values and R^2', add_fit_arguments, cmd_fit)
    _register(subparsers, 'perturb', 'write a perturbed release and its sidecar', add_perturb_arguments, cmd_perturb)
    _register(subparsers, 'verify', 'check a release against theory', add_verify_arguments, cmd_verify)
    _register(subparsers, 'restore', 'undo the reduced-accuracy scaling', add_restore_arguments, cmd_restore)
    _register(subparsers, 'quasi', 'compare several independent releases', add_quasi_arguments, cmd_quasi)

    # Testing and calibration
    _register(subparsers, 'chow', 'Chow test between two files', add_chow_arguments, cmd_chow)
    _register(subparsers, 'calibrate', 'choose b by Monte-Carlo Chow tests', add_calibrate_arguments, cmd_calibrate)

    # Data and tables
    _register(subparsers, 'synth', 'generate a synthetic housing dataset', add_synth_arguments, cmd_synth)
    _register(subparsers, 'theory-table', 'correlation of y and y+eps by R^2 and b',
              add_theory_table_arguments, cmd_theory_table)


def build_parser() -> argparse.ArgumentParser:
    parser = CliParser(prog='perturb-release', description='Regression-preserving response perturbation')
    parser.add_argument('--config', help='key=value file overriding the environment and .env')
    parser.add_argument('--verbose', action='store_true', help='log at DEBUG level')
    subparsers = parser.add_subparsers(dest='command', required=True, parser_class=CliParser)
    register_all_commands(subparsers)
    return parser


def _apply_log_level(args: argparse.Namespace) -> None:
    if args.verbose:
        level = logging.DEBUG
    else:
        level = logging.getLevelName(str(args.log_level).upper())
        if not isinstance(level, int):
            raise InvalidParameters(f"unknown LOG_LEVEL {args.log_level!r}")
    logging.getLogger().setLevel(level)


def cli_main(argv: Sequence[str]) -> int:
    """Parse argv, run one subcommand and return its exit status."""
    try:
        args = build_parser().parse_args(list(argv))
        resolved = resolve_config(args)
        _apply_log_level(args)
        print_config(resolved)
        return args.handler(args)
    except SystemExit as e:
        # --help and --version
        return int(e.code or 0)
    except PerturbationError as e:
        logger.error(f"{e.code}: {e}")
        print(f"error={e.code} message={e}", file=sys.stderr)
        return e.exit_status
    except Exception as e:
        logger.error(f"Unexpected error: {e}")
        raise
