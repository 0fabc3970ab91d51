"""Header-first numeric CSV tables shared by every artifact writer."""

from __future__ import annotations

import logging
import warnings
from pathlib import Path
from typing import List, Sequence, Tuple, Union

import numpy as np

from .errors import ArtifactError, SchemaError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

FLOAT_FORMAT = "%.17g"


def write_table(path: PathLike, columns: Sequence[str], data: Sequence[np.ndarray]) -> Path:
    """Write equal-length numeric columns to *path* with a mandatory header row."""

    target = Path(path)
    if len(columns) != len(data):
        raise SchemaError(f"{len(columns)} column names for {len(data)} data columns")
    arrays = [np.asarray(column, dtype=float).ravel() for column in data]
    lengths = {array.size for array in arrays}
    if len(lengths) > 1:
        raise SchemaError(f"columns have different lengths: {sorted(lengths)}")
    rows = np.column_stack(arrays) if arrays and arrays[0].size else np.empty((0, len(columns)))
    try:
        target.parent.mkdir(parents=True, exist_ok=True)
        with target.open("w", encoding="utf8", newline="\n") as fh:
            np.savetxt(fh, rows, fmt=FLOAT_FORMAT, delimiter=",", header=",".join(columns), comments="")
    except OSError as exc:
        raise ArtifactError(f"unable to write '{target}': {exc}") from exc
    logger.debug("Wrote %d rows to %s", rows.shape[0], target)
    return target


def read_table(path: PathLike, expected: Sequence[str] = ()) -> Tuple[List[str], np.ndarray]:
    """Return ``(header, rows)``; *expected*, when given, must equal the header."""

    source = Path(path)
    try:
        with source.open("r", encoding="utf8") as fh:
            header_line = fh.readline()
            if not header_line.strip():
                raise SchemaError(f"'{source}' has no header row")
            header = [name.strip() for name in header_line.strip().split(",")]
            if expected and list(expected) != header:
                raise SchemaError(f"'{source}' has columns {header}, expected {list(expected)}")
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", UserWarning)
                rows = np.loadtxt(fh, delimiter=",", dtype=float, ndmin=2)
    except OSError as exc:
        raise ArtifactError(f"unable to read '{source}': {exc}") from exc
    except ValueError as exc:
        if isinstance(exc, SchemaError):
            raise
        raise SchemaError(f"'{source}' contains non-numeric data: {exc}") from exc
    if rows.size == 0:
        rows = np.empty((0, len(header)))
    elif rows.shape[1] != len(header):
        raise SchemaError(f"'{source}' rows have {rows.shape[1]} fields for {len(header)} columns")
    return header, rows


__all__ = ["FLOAT_FORMAT", "read_table", "write_table"]
