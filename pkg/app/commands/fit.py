import argparse
import logging

from app.commands.base import add_schema_arguments, fit_lines, load_dataset, print_key_values
from app.regression import fit_ols

logger = logging.getLogger(__name__)


def add_fit_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('input', help='CSV file with a header row')
    add_schema_arguments(parser)


def cmd_fit(args: argparse.Namespace) -> int:
    """Print coefficients, t-values and R^2 of the OLS fit."""
    _, data = load_dataset(args.input, args)
    fit = fit_ols(data)
    print_key_values([
        ('n', data.n),
        ('p', data.p),
        ('r_squared', repr(fit.r_squared)),
        ('rss', repr(fit.rss)),
        *fit_lines(data, fit.beta_hat, fit.t_values),
    ])
    return 0
