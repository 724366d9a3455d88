import argparse
import logging

from app.charts import plot_quasi_boxplot, plot_quasi_scatter
from app.commands.base import add_schema_arguments, load_dataset
from app.commands.perturb import add_noise_arguments, noise_spec_from_args
from app.noise.quasi import correlation_matrix, generate_quasi_responses, summary_statistics

logger = logging.getLogger(__name__)


def add_quasi_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('input', help='original CSV')
    add_schema_arguments(parser)
    add_noise_arguments(parser)
    parser.add_argument('--count', type=int, default=4, help='number of quasi responses')
    parser.add_argument('--plot', help='write a boxplot of the original and quasi responses (PNG)')
    parser.add_argument('--scatter', help='write pairwise scatterplots of the same sets (PNG)')


def cmd_quasi(args: argparse.Namespace) -> int:
    """Print correlations and summary statistics of several independent releases."""
    _, data = load_dataset(args.input, args)
    releases = generate_quasi_responses(data, noise_spec_from_args(args), args.count)

    print(correlation_matrix(data, releases).to_csv(float_format='%.6f', lineterminator='\n'), end='')
    print()
    print(summary_statistics(data, releases).to_csv(float_format='%.6g', lineterminator='\n'), end='')
    if args.plot:
        plot_quasi_boxplot(data, releases, args.plot)
    if args.scatter:
        plot_quasi_scatter(data, releases, args.scatter)
    return 0
