"""Plain numeric CSV reading/writing with row/column-specific validation."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .errors import ValidationError

FMT = "%.17g"


def write_csv(path, columns, data) -> None:
    """Header row plus full-precision rows, LF line endings."""
    data = np.asarray(data, dtype=float)
    if data.ndim == 1:
        data = data[:, None]
    if data.shape[1] != len(columns):
        raise ValueError(f"{len(columns)} column names for {data.shape[1]} columns")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(columns) + "\n")
        np.savetxt(fh, data, fmt=FMT, delimiter=",")


def read_csv(path, expected=None, prefix=None, min_rows: int = 2):
    """Return ``(header, array)``.

    ``expected`` pins the exact header; ``prefix`` only pins its leading
    columns (for variable-width formats like ``t,x1,...,xd``).  Any bad
    cell raises :class:`ValidationError` naming the 1-based row and column.
    """
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"{path}: no such file")
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValidationError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if expected is not None and header != list(expected):
        raise ValidationError(f"{path}: row 1: header {','.join(header)!r}, expected {','.join(expected)!r}")
    if prefix is not None and header[: len(prefix)] != list(prefix):
        raise ValidationError(f"{path}: row 1: header must start with {','.join(prefix)!r}")
    body = [r for r in rows[1:] if r and any(c.strip() for c in r)]
    if len(body) < min_rows:
        raise ValidationError(f"{path}: need at least {min_rows} data rows, got {len(body)}")
    out = np.empty((len(body), len(header)))
    for i, row in enumerate(body, start=2):
        if len(row) != len(header):
            raise ValidationError(
                f"{path}: row {i}: {len(row)} columns, expected {len(header)} (column {len(row) + 1 if len(row) < len(header) else len(header) + 1})"
            )
        for j, cell in enumerate(row):
            try:
                out[i - 2, j] = float(cell)
            except ValueError:
                raise ValidationError(f"{path}: row {i}, column {j + 1} ({header[j]}): not a number: {cell!r}") from None
            if not np.isfinite(out[i - 2, j]):
                raise ValidationError(f"{path}: row {i}, column {j + 1} ({header[j]}): non-finite value")
    return header, out


ROT_COLS = [f"R{i}{j}" for i in range(3) for j in range(3)]
