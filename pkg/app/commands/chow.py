import argparse
import logging

from app.chow import chow_test
from app.commands.base import add_schema_arguments, load_dataset, print_key_values

logger = logging.getLogger(__name__)


def add_chow_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('first', help='first CSV')
    parser.add_argument('second', help='second CSV with the same columns')
    add_schema_arguments(parser)
    parser.add_argument('--alpha', type=float, help='significance level (default CALIBRATION_ALPHA)')


def cmd_chow(args: argparse.Namespace) -> int:
    """Chow test of equal coefficients between the regressions in two files."""
    _, first = load_dataset(args.first, args)
    _, second = load_dataset(args.second, args)
    result = chow_test(first.X, first.y, second.X, second.y, args.alpha)
    print_key_values([
        ('f_value', repr(result.f_value)),
        ('df1', result.df1),
        ('df2', result.df2),
        ('critical_value', repr(result.critical_value)),
        ('accepted', str(result.accepted).lower()),
    ])
    return 0
