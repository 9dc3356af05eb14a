"""CSV / JSON / TSV readers and writers used by the command line."""

import csv
import hashlib
import json
from pathlib import Path

import numpy as np

from .exceptions import InvalidInput

__all__ = [
    "read_json",
    "read_matrix_csv",
    "read_precision_json",
    "sha256_file",
    "write_edges_tsv",
    "write_json",
    "write_matrix_csv",
    "write_precision_json",
]


def _is_number(s):
    try:
        float(s)
    except ValueError:
        return False
    return True


def read_matrix_csv(path):
    """Read a numeric CSV; a first row that does not parse is a header.

    Returns
    -------
    data : ndarray of shape (n, p)
    header : list of str or None
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise InvalidInput(f"{path}: no data rows")
    header = None
    if not all(_is_number(c) for c in rows[0]):
        header, rows = [c.strip() for c in rows[0]], rows[1:]
    if not rows:
        raise InvalidInput(f"{path}: header only, no data rows")
    width = len(rows[0])
    for r in rows:
        if len(r) != width:
            raise InvalidInput(f"{path}: ragged row of length {len(r)}, expected {width}")
    try:
        data = np.array([[float(c) for c in r] for r in rows])
    except ValueError as exc:
        raise InvalidInput(f"{path}: non-numeric entry ({exc})") from None
    if not np.all(np.isfinite(data)):
        raise InvalidInput(f"{path}: non-finite entries")
    return data, header


def write_matrix_csv(path, data, header=None, integer=False):
    """Write rows with 17 significant digits (lossless for float64)."""
    fmt = "%d" if integer else "%.17g"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        if header is not None:
            fh.write(",".join(header) + "\n")
        np.savetxt(fh, np.asarray(data), fmt=fmt, delimiter=",")


def write_json(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=1, sort_keys=True)
        fh.write("\n")


def read_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def write_precision_json(path, matrix, lambdas, stage, **extra):
    matrix = np.asarray(matrix, dtype=float)
    obj = {
        "p": int(matrix.shape[0]),
        "matrix": matrix.tolist(),
        "lambda": np.asarray(lambdas, dtype=float).tolist(),
        "stage": stage,
    }
    obj.update(extra)
    write_json(path, obj)


def read_precision_json(path):
    obj = read_json(path)
    try:
        matrix = np.asarray(obj["matrix"], dtype=float)
    except (KeyError, TypeError, ValueError):
        raise InvalidInput(f"{path}: missing or malformed 'matrix'") from None
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise InvalidInput(f"{path}: matrix must be square, got shape {matrix.shape}")
    return matrix, obj


def write_edges_tsv(path, matrix):
    """``i<TAB>j<TAB>weight`` for every nonzero upper-triangular entry."""
    matrix = np.asarray(matrix)
    rows, cols = np.nonzero(np.triu(matrix, 1))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("i\tj\tweight\n")
        for i, j in zip(rows.tolist(), cols.tolist()):
            fh.write(f"{i}\t{j}\t{matrix[i, j]:.17g}\n")


def sha256_file(path):
    h = hashlib.sha256()
    with open(Path(path), "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()
