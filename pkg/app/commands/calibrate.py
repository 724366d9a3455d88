import argparse
import logging

import numpy as np

from app.calibration import DEFAULT_B_GRID, DEFAULT_Q_GRID, CalibrationPlan, recommend_b, run_calibration
from app.charts import plot_f_percentiles
from app.commands.base import add_schema_arguments, load_dataset, parse_float_list, print_key_values
from app.data.files import write_text
from app.errors import InvalidParameters

logger = logging.getLogger(__name__)


def add_calibrate_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('input', help='original CSV')
    add_schema_arguments(parser)
    parser.add_argument('--q', help='comma-separated subsample fractions (default 0.05,0.1,0.2,...,0.9)')
    parser.add_argument('--b', dest='b_grid', help="b grid: comma list, 'lo:hi' (default grid within the range) "
                                    "or 'lo:hi:step'")
    parser.add_argument('--a', type=float, help='noise multiplier a (default NOISE_A)')
    parser.add_argument('--trials', type=int, help='subsamples per cell (default CALIBRATION_TRIALS)')
    parser.add_argument('--alpha', type=float, help='Chow test level (default CALIBRATION_ALPHA)')
    parser.add_argument('--seed', type=int, default=0, help='master seed')
    parser.add_argument('--workers', type=int, help='parallel workers (default CALIBRATION_WORKERS)')
    parser.add_argument('--max-retries', type=int, help='noise redraws per trial (default NOISE_MAX_RETRIES)')
    parser.add_argument('--full-data-fit', action='store_true',
                        help='perturb the full dataset and subsample it, instead of perturbing each subsample')
    parser.add_argument('--shared-subsamples', action='store_true', help='reuse subsamples across b')
    parser.add_argument('--positivity', action='store_true', help='require positive perturbed values')
    parser.add_argument('--output', help='write the acceptance table here instead of stdout')
    parser.add_argument('--percentiles', help='write the F percentile table CSV here')
    parser.add_argument('--plot', help='write the F percentile chart (PNG) here')
    parser.add_argument('--plot-q', type=float, help='q shown in the chart (default the first q)')


def parse_b_grid(text) -> list[float]:
    """Comma list, 'lo:hi' (default grid values in the range) or 'lo:hi:step'."""
    if text is None:
        return list(DEFAULT_B_GRID)
    if ':' not in text:
        return parse_float_list(text, '--b')
    parts = parse_float_list(text.replace(':', ','), '--b')
    if len(parts) == 2:
        low, high = parts
        grid = [b for b in DEFAULT_B_GRID if low - 1e-12 <= b <= high + 1e-12]
    elif len(parts) == 3:
        low, high, step = parts
        if step <= 0:
            raise InvalidParameters(f"--b step must be positive, got {step}")
        grid = [float(b) for b in np.round(np.arange(low, high + step / 2, step), 12)]
    else:
        raise InvalidParameters(f"--b range must be 'lo:hi' or 'lo:hi:step', got {text!r}")
    if not grid:
        raise InvalidParameters(f"--b {text!r} selects no b values")
    return grid


def cmd_calibrate(args: argparse.Namespace) -> int:
    """Run the Chow-test sweep and print the acceptance table and the recommended b."""
    _, data = load_dataset(args.input, args)
    if args.workers < 1:
        raise InvalidParameters(f"workers must be positive, got {args.workers}")
    plan = CalibrationPlan.create(
        q_grid=tuple(parse_float_list(args.q, '--q')) if args.q else DEFAULT_Q_GRID,
        b_grid=tuple(parse_b_grid(args.b_grid)),
        trials=args.trials,
        alpha=args.alpha,
        a=args.a,
        master_seed=args.seed,
        perturb_full_data=args.full_data_fit,
        shared_subsamples=args.shared_subsamples,
        positivity_required=args.positivity,
        max_retries=args.max_retries,
    )
    report = run_calibration(data, plan, workers=args.workers)

    table = report.acceptance_table()
    if args.output:
        write_text(args.output, table)
    else:
        print(table, end='')
    if args.percentiles:
        write_text(args.percentiles, report.percentile_table())
    if args.plot:
        plot_q = args.plot_q if args.plot_q is not None else plan.q_grid[0]
        matches = [q for q in plan.q_grid if abs(q - plot_q) < 1e-12]
        if not matches:
            raise InvalidParameters(f"--plot-q {plot_q} is not on the q grid {list(plan.q_grid)}")
        plot_f_percentiles(report, matches[0], args.plot)

    print_key_values([
        *[(f"b_star.{q:g}", 'none' if b is None else f"{b:g}") for q, b in report.b_star_per_q.items()],
        ('failed_trials', int(report.failures.to_numpy().sum())),
        ('subsample_redraws', report.subsample_redraws),
    ])
    # raises NoAdequateB when some q never reaches 1 - alpha
    print_key_values([('recommended_b', f"{recommend_b(report):g}")])
    return 0
