"""
CSV ingestion and writing.

Files are comma-separated UTF-8 with a header row, '.' as the decimal point
and no thousands separators. Cells are kept as text until a schema says how
to read them, so error messages can point at the exact row and column and
columns we do not touch are written back unchanged.
"""
import logging
import math
import re
from typing import Literal, Sequence

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from app.data.files import atomic_output
from app.errors import InvalidSpec, NonFiniteValue, ParseError, SchemaMismatch
from app.regression import INTERCEPT, Dataset

logger = logging.getLogger(__name__)

DECIMAL = re.compile(r"[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?")
DEFAULT_DIGITS = 17


class ColumnSchema(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str = Field(min_length=1)
    kind: Literal["continuous", "dummy"] = "continuous"
    role: Literal["response", "explanatory", "ignored"] = "explanatory"


def build_schema(columns: Sequence[str], response: str, dummies: Sequence[str] = (),
                 ignored: Sequence[str] = ()) -> list[ColumnSchema]:
    """Schema for a header: one response, the listed dummies and ignored columns, the rest explanatory."""
    columns = list(columns)
    if response not in columns:
        raise SchemaMismatch(f"response column '{response}' is not in the header")
    unknown = sorted((set(dummies) | set(ignored)) - set(columns))
    if unknown:
        raise SchemaMismatch(f"columns {unknown} are not in the header")

    schema = []
    for name in columns:
        if name == response:
            role = "response"
        elif name in ignored:
            role = "ignored"
        else:
            role = "explanatory"
        try:
            schema.append(ColumnSchema(name=name, kind="dummy" if name in dummies else "continuous", role=role))
        except ValidationError as e:
            raise InvalidSpec(f"invalid column '{name}': {e.errors()[0]['msg']}") from e
    return schema


def check_schema(schema: Sequence[ColumnSchema]) -> None:
    names = [column.name for column in schema]
    if len(set(names)) != len(names):
        raise InvalidSpec("column names in the schema must be unique")
    responses = [column.name for column in schema if column.role == "response"]
    if len(responses) != 1:
        raise InvalidSpec(f"exactly one response column is required, got {responses}")
    if INTERCEPT in names:
        raise InvalidSpec(f"'{INTERCEPT}' is reserved for the prepended ones column")


def read_table(path) -> pd.DataFrame:
    """Every cell as text, header taken from the first row."""
    try:
        return pd.read_csv(path, dtype=str, keep_default_na=False, na_filter=False, encoding="utf-8")
    except FileNotFoundError as e:
        raise ParseError(f"cannot read '{path}': file not found") from e
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise ParseError(f"cannot parse '{path}': {e}") from e


def parse_column(values: Sequence, column: str) -> np.ndarray:
    """Parse one column of text cells; rows are reported 1-based, header excluded."""
    parsed = np.empty(len(values))
    for row, text in enumerate(values, start=1):
        if not isinstance(text, str) or not text.strip():
            raise ParseError("empty cell", row=row, column=column)
        text = text.strip()
        try:
            number = float(text)
        except ValueError:
            raise ParseError(f"cannot parse {text!r} as a decimal number", row=row, column=column) from None
        if not math.isfinite(number):
            raise NonFiniteValue(f"non-finite value {text!r}", row=row, column=column)
        if not DECIMAL.fullmatch(text):
            raise ParseError(f"{text!r} is not a plain decimal number", row=row, column=column)
        parsed[row - 1] = number
    return parsed


def dataset_from_table(table: pd.DataFrame, schema: Sequence[ColumnSchema]) -> Dataset:
    check_schema(schema)
    names = [column.name for column in schema]
    header = list(table.columns)
    missing = [name for name in names if name not in header]
    if missing:
        raise SchemaMismatch(f"columns {missing} are missing from the file")
    extra = [name for name in header if name not in names]
    if extra:
        raise SchemaMismatch(f"columns {extra} are not described by the schema")

    response = next(column for column in schema if column.role == "response")
    features = []
    feature_names = []
    for column in schema:
        if column.role != "explanatory":
            continue
        values = parse_column(table[column.name].tolist(), column.name)
        if column.kind == "dummy":
            bad = np.flatnonzero((values != 0) & (values != 1))
            if bad.size:
                raise SchemaMismatch(f"dummy column '{column.name}' holds {values[bad[0]]!r} at row {bad[0] + 1}")
        features.append(values)
        feature_names.append(column.name)

    y = parse_column(table[response.name].tolist(), response.name)
    X = np.column_stack(features) if features else np.empty((len(y), 0))
    return Dataset.with_intercept(X, y, feature_names, response.name)


def load_csv(path, schema: Sequence[ColumnSchema]) -> Dataset:
    """Read a CSV into a Dataset with the intercept column prepended; row order is kept."""
    data = dataset_from_table(read_table(path), schema)
    logger.info(f"Loaded {path}: n={data.n}, p={data.p}, response '{data.response_name}'")
    return data


def format_values(values, digits: int = DEFAULT_DIGITS, integer: bool = False) -> list[str]:
    if integer:
        return [f"{value:.0f}" for value in np.round(values)]
    return [f"{value:.{digits}g}" for value in values]


def write_csv(data: Dataset, path, digits: int = DEFAULT_DIGITS) -> None:
    """Write explanatory columns and the response; the intercept column is implied."""
    frame = pd.DataFrame(data.X[:, 1:], columns=list(data.column_names[1:]))
    frame[data.response_name] = data.y
    with atomic_output(path) as tmp:
        frame.to_csv(tmp, index=False, float_format=f"%.{digits}g", lineterminator="\n")


def write_release_csv(table: pd.DataFrame, response: str, y_released, path, digits: int = DEFAULT_DIGITS,
                      integer: bool = False) -> None:
    """Write the original table with the response column replaced; other cells are copied as text."""
    y_released = np.asarray(y_released, dtype=float)
    if y_released.shape != (len(table),):
        raise SchemaMismatch(f"release has {y_released.shape[0]} values for a table of {len(table)} rows")
    released = table.copy()
    released[response] = format_values(y_released, digits, integer)
    with atomic_output(path) as tmp:
        released.to_csv(tmp, index=False, lineterminator="\n")
