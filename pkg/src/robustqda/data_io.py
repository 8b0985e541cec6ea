"""CSV ingestion and emission for the command-line tools.

The dialect is deliberately plain: comma separators, a mandatory header
row, LF line endings, one observation per row.  Feature cells must parse
as finite decimals.  Labels may be integers (validated as 1..G at fit
time) or arbitrary strings, in which case the distinct names are mapped
to 1..G in sorted order and the mapping travels with the model file.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError
from .fileio import write_text_atomic

__all__ = [
    "Dataset",
    "encode_labels",
    "encode_with_names",
    "read_dataset",
    "write_dataset",
    "write_predictions_csv",
]


@dataclass(frozen=True)
class Dataset:
    """Parsed CSV contents.

    ``labels_raw`` holds the stripped label cells as text (None when no
    label column was requested); encoding to 1..G happens separately so
    prediction-time data can reuse a model's name mapping.
    """

    X: np.ndarray
    feature_names: tuple
    labels_raw: tuple | None = None

    def __post_init__(self):
        self.X.setflags(write=False)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]


def _open_rows(source):
    if hasattr(source, "read"):
        return csv.reader(source)
    return csv.reader(io.StringIO(Path(source).read_text(encoding="utf-8")))


def read_dataset(source, label_col: str | None = None) -> Dataset:
    """Read a CSV file (path or open text file) into a Dataset.

    ``label_col`` names the column to split off as labels; the remaining
    columns are features, kept in header order.  Raises DataError for a
    missing header, ragged rows, or any feature cell that is not a finite
    number, citing the data row (1-based) and column name.
    """
    rows = list(_open_rows(source))
    if not rows:
        raise DataError("empty CSV: expected a header row")
    header = [name.strip() for name in rows[0]]
    if len(set(header)) != len(header):
        raise DataError("duplicate column names in header")
    label_idx = None
    if label_col is not None:
        if label_col not in header:
            raise DataError(f"no column named {label_col!r} (header: {', '.join(header)})")
        label_idx = header.index(label_col)
    feature_idx = [j for j in range(len(header)) if j != label_idx]
    if not feature_idx:
        raise DataError("no feature columns left after removing the label column")
    names = tuple(header[j] for j in feature_idx)

    data = np.empty((len(rows) - 1, len(feature_idx)))
    labels: list[str] | None = [] if label_idx is not None else None
    for i, row in enumerate(rows[1:], start=1):
        if len(row) != len(header):
            raise DataError(f"row {i}: expected {len(header)} cells, got {len(row)}")
        for k, j in enumerate(feature_idx):
            cell = row[j].strip()
            try:
                value = float(cell)
            except ValueError:
                raise DataError(f"row {i}, column {header[j]!r}: {cell!r} is not a number") from None
            if not np.isfinite(value):
                raise DataError(f"row {i}, column {header[j]!r}: {cell!r} is not finite")
            data[i - 1, k] = value
        if labels is not None:
            labels.append(row[label_idx].strip())
    if data.shape[0] == 0:
        raise DataError("CSV contains a header but no data rows")
    return Dataset(X=data, feature_names=names, labels_raw=None if labels is None else tuple(labels))


def encode_labels(labels_raw) -> tuple[np.ndarray, tuple | None]:
    """Turn raw label cells into integer classes.

    If every cell parses as an integer the values pass through untouched
    (contiguity is checked at fit time) and the name table is None.
    Otherwise the distinct strings are mapped to 1..G in sorted order and
    returned as the second element.
    """
    try:
        y = np.array([int(cell) for cell in labels_raw], dtype=np.int64)
        return y, None
    except ValueError:
        pass
    names = tuple(sorted(set(labels_raw)))
    index = {name: g for g, name in enumerate(names, start=1)}
    return np.array([index[cell] for cell in labels_raw], dtype=np.int64), names


def encode_with_names(labels_raw, label_names) -> np.ndarray:
    """Encode labels against an existing name table (from a model file)."""
    index = {name: g for g, name in enumerate(label_names, start=1)}
    out = np.empty(len(labels_raw), dtype=np.int64)
    for i, cell in enumerate(labels_raw):
        if cell not in index:
            known = ", ".join(label_names)
            raise DataError(f"row {i + 1}: label {cell!r} is not one of the trained classes ({known})")
        out[i] = index[cell]
    return out


def _cell(x: float) -> str:
    return repr(float(x))


def write_dataset(target, X, feature_names=None, y=None, label_col: str = "label") -> None:
    """Write features (and optionally labels) as CSV.

    Floats use shortest round-trip decimals, so a write/read cycle
    reproduces the array bit for bit.  ``target`` may be a path or an
    open text file.
    """
    X = np.asarray(X, dtype=np.float64)
    n, p = X.shape
    if feature_names is None:
        feature_names = tuple(f"x{j + 1}" for j in range(p))
    if len(feature_names) != p:
        raise DataError(f"expected {p} feature names, got {len(feature_names)}")
    lines = []
    header = list(feature_names)
    if y is not None:
        y = np.asarray(y)
        if y.shape[0] != n:
            raise DataError("labels and data have different lengths")
        header.append(label_col)
    lines.append(",".join(header))
    for i in range(n):
        cells = [_cell(v) for v in X[i]]
        if y is not None:
            cells.append(str(y[i]))
        lines.append(",".join(cells))
    text = "\n".join(lines) + "\n"
    if hasattr(target, "write"):
        target.write(text)
    else:
        write_text_atomic(target, text)


def write_predictions_csv(target, labels, scores, min_rd, label_names=None) -> None:
    """Write classification output: row, predicted, min_rd, then one
    score column per class.  Predicted is the original class name when a
    name table is given; the outlier class always prints as 0.
    """
    labels = np.asarray(labels)
    scores = np.asarray(scores, dtype=np.float64)
    min_rd = np.asarray(min_rd, dtype=np.float64)
    G = scores.shape[1]
    header = ["row", "predicted", "min_rd"] + [f"score_{g}" for g in range(1, G + 1)]
    lines = [",".join(header)]
    for i in range(labels.shape[0]):
        lbl = int(labels[i])
        if label_names is not None and lbl != 0:
            shown = label_names[lbl - 1]
        else:
            shown = str(lbl)
        cells = [str(i + 1), shown, f"{min_rd[i]:.9g}"]
        cells += [f"{scores[i, g]:.9g}" for g in range(G)]
        lines.append(",".join(cells))
    text = "\n".join(lines) + "\n"
    if hasattr(target, "write"):
        target.write(text)
    else:
        write_text_atomic(target, text)
