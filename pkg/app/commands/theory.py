import argparse
import logging

from app.commands.base import parse_float_list, print_key_values
from app.data.sidecar import read_sidecar, reduced_statistics
from app.errors import InvalidParameters
from app.theory import TABLE_B, TABLE_R2, correlation_table, restore_original_statistics

logger = logging.getLogger(__name__)


def add_theory_table_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--r2', help='comma-separated R^2 rows (default 0.4,0.6,0.8)')
    parser.add_argument('--b', dest='b_grid', help='comma-separated b columns (default 0,0.25,...,2)')
    parser.add_argument('--a', type=float, help='noise multiplier a (default NOISE_A)')
    parser.add_argument('--decimals', type=int, default=2)


def cmd_theory_table(args: argparse.Namespace) -> int:
    """Print the correlation of y and y + eps over an R^2 x b grid."""
    if not 0 <= args.decimals <= 17:
        raise InvalidParameters(f"decimals must lie in [0, 17], got {args.decimals}")
    r2_grid = parse_float_list(args.r2, '--r2') if args.r2 else TABLE_R2
    b_grid = parse_float_list(args.b_grid, '--b') if args.b_grid else TABLE_B
    table = correlation_table(r2_grid, b_grid, args.a)
    table.columns = [f"{b:g}" for b in table.columns]
    table.index = [f"{r2:g}" for r2 in table.index]
    print(table.to_csv(float_format=f"%.{args.decimals}f", index_label='R2\\b', lineterminator='\n'), end='')
    return 0


def add_restore_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('sidecar', help='sidecar of a reduced-accuracy release')


def cmd_restore(args: argparse.Namespace) -> int:
    """Recover the original t-values and R^2 from a reduced-accuracy release."""
    names, t_reduced, r2_reduced = reduced_statistics(read_sidecar(args.sidecar))
    t_values, r2 = restore_original_statistics(t_reduced, r2_reduced)
    print_key_values([
        ('r_squared', repr(r2)),
        *[(f"t_value.{name}", repr(float(t))) for name, t in zip(names, t_values)],
    ])
    return 0
