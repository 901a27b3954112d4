"""CSV ingestion and writing for composition matrices.

File contract: first row is a header of component names, every following row
holds the numeric entries with '.' as decimal point and ',' as separator (no
thousands separators). A row that fails validation aborts ingestion with the
file name, the 1-based data row index and the violated rule in the message.
Values are written with repr(), which round-trips doubles exactly and always
carries enough digits for downstream recomputation.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .compositional import (
    INGEST_TOL,
    CompositionMatrix,
    NegativeEntry,
    RowSumViolation,
    TooFewComponents,
)
from .errors import ValidationError


def read_composition_csv(path, tol: float = INGEST_TOL) -> CompositionMatrix:
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise TooFewComponents(f"{path}: file is empty")
        names = tuple(h.strip() for h in header)
        if len(names) < 2:
            raise TooFewComponents(f"{path}: header has {len(names)} components, need >= 2")
        rows: list[list[float]] = []
        for idx, row in enumerate(reader, start=1):
            if not any(cell.strip() for cell in row):
                continue  # trailing blank line
            if len(row) != len(names):
                raise ValidationError(
                    f"{path} row {idx}: expected {len(names)} fields, got {len(row)}"
                )
            try:
                values = [float(cell) for cell in row]
            except ValueError as exc:
                raise ValidationError(f"{path} row {idx}: non-numeric entry ({exc})") from exc
            for j, v in enumerate(values):
                if v < -tol:
                    raise NegativeEntry(
                        f"{path} row {idx}: NegativeEntry, column {names[j]} is {v!r}"
                    )
            total = sum(values)
            if abs(total - 1.0) > tol:
                raise RowSumViolation(
                    f"{path} row {idx}: RowSumViolation, sum is {total!r} (tolerance {tol})"
                )
            rows.append(values)
    if not rows:
        raise TooFewComponents(f"{path}: no data rows")
    return CompositionMatrix(np.array(rows), names=names, tol=tol)


def write_matrix_csv(path, values: np.ndarray, header: tuple[str, ...]) -> None:
    values = np.asarray(values, dtype=np.float64)
    if values.shape[1] != len(header):
        raise ValidationError(f"{len(header)} header names for {values.shape[1]} columns")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in values:
            writer.writerow([repr(float(v)) for v in row])


def write_composition_csv(path, matrix: CompositionMatrix,
                          prefix: str = "c") -> None:
    names = matrix.names or default_names(matrix.n_components, prefix)
    write_matrix_csv(path, matrix.values, names)


def default_names(count: int, prefix: str) -> tuple[str, ...]:
    return tuple(f"{prefix}{i + 1}" for i in range(count))
