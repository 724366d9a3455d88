import argparse
import logging
import os
import sys
from typing import Optional

import numpy as np

from app.data.csv_io import build_schema, dataset_from_table, read_table
from app.errors import InvalidParameters, ParseError
from app.regression import Dataset
from config import load_settings

logger = logging.getLogger(__name__)

# config key -> (argparse destination, type)
CONFIG_FLAGS = {
    'NOISE_A': ('a', float),
    'NOISE_B': ('b', float),
    'NOISE_MAX_RETRIES': ('max_retries', int),
    'CALIBRATION_TRIALS': ('trials', int),
    'CALIBRATION_ALPHA': ('alpha', float),
    'CALIBRATION_WORKERS': ('workers', int),
    'LOG_LEVEL': ('log_level', str),
    'OUTPUT_DIGITS': ('digits', int),
}


class CliParser(argparse.ArgumentParser):
    """ArgumentParser that reports usage errors as InvalidParameters instead of exiting."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise InvalidParameters(message)


def resolve_config(args: argparse.Namespace) -> dict[str, tuple[object, str]]:
    """
    Fill every configurable option on `args`: the flag when given, otherwise
    the --config file, the environment or the default, in that order.
    """
    config_file = getattr(args, 'config', None)
    if config_file is not None and not os.path.isfile(config_file):
        raise ParseError(f"config file '{config_file}' not found")
    settings = load_settings(config_file)

    resolved = {}
    for key, (dest, convert) in CONFIG_FLAGS.items():
        value = getattr(args, dest, None)
        if value is not None:
            resolved[key] = (value, 'flag')
            continue
        raw, source = settings[key]
        try:
            value = convert(raw)
        except ValueError:
            raise InvalidParameters(f"{key}={raw!r} from {source} is not a valid {convert.__name__}") from None
        setattr(args, dest, value)
        resolved[key] = (value, source)
    return resolved


def print_config(resolved: dict[str, tuple[object, str]]) -> None:
    """Resolved settings go to stderr on every run, whatever LOG_LEVEL is."""
    for key, (value, source) in resolved.items():
        print(f"config.{key}={value} source={source}", file=sys.stderr)


def split_names(text: Optional[str]) -> list[str]:
    if not text:
        return []
    return [name.strip() for name in text.split(',') if name.strip()]


def parse_float_list(text: str, option: str) -> list[float]:
    try:
        return [float(item) for item in split_names(text)]
    except ValueError:
        raise InvalidParameters(f"{option} expects comma-separated numbers, got {text!r}") from None


def add_schema_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--response', required=True, help='name of the response column')
    parser.add_argument('--dummies', help='comma-separated 0/1 columns')
    parser.add_argument('--ignore', help='comma-separated columns left out of the regression')


def load_dataset(path, args: argparse.Namespace):
    """Read a CSV with the schema given on the command line; returns the raw table and the Dataset."""
    table = read_table(path)
    schema = build_schema(table.columns, args.response, split_names(args.dummies), split_names(args.ignore))
    return table, dataset_from_table(table, schema)


def print_key_values(pairs) -> None:
    for key, value in pairs:
        print(f"{key}={value}")


def fit_lines(data: Dataset, beta: np.ndarray, t_values: np.ndarray) -> list[tuple[str, str]]:
    lines = []
    for name, coefficient, t_value in zip(data.column_names, beta, t_values):
        lines.append((f"beta.{name}", repr(float(coefficient))))
        lines.append((f"t_value.{name}", repr(float(t_value))))
    return lines


def check_digits(digits: int) -> int:
    if not 1 <= digits <= 17:
        raise InvalidParameters(f"digits must lie in [1, 17], got {digits}")
    return digits
