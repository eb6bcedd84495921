"""CSV readers/writers and the run manifest written next to every output."""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

import numpy as np

from .similarity import InputShapeError

FLOAT_FORMAT = "%.17g"


class ParseError(InputShapeError):
    """Malformed CSV input, located by 1-based row and column."""

    def __init__(self, message: str, row: int | None = None, column: int | None = None):
        where = ""
        if row is not None:
            where = f" (row {row}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + where)
        self.row = row
        self.column = column


def _rows(path, header: bool):
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(cell.strip() for cell in r)]
    offset = 1
    if header and rows:
        rows = rows[1:]
        offset = 2
    return rows, offset


def read_labels(path, header: bool = False) -> np.ndarray:
    """One MCMC draw per row, integer labels in every column."""
    rows, offset = _rows(path, header)
    if not rows:
        raise ParseError(f"no draws found in {path}")
    width = len(rows[0])
    out = np.empty((len(rows), width), dtype=np.int64)
    for r, row in enumerate(rows):
        if len(row) != width:
            raise ParseError(f"expected {width} labels, found {len(row)}", r + offset)
        for c, cell in enumerate(row):
            try:
                out[r, c] = int(cell.strip())
            except ValueError:
                raise ParseError(f"label {cell!r} is not an integer", r + offset, c + 1) from None
    return out


def read_matrix(path, header: bool = False) -> np.ndarray:
    rows, offset = _rows(path, header)
    if not rows:
        raise ParseError(f"no rows found in {path}")
    width = len(rows[0])
    out = np.empty((len(rows), width))
    for r, row in enumerate(rows):
        if len(row) != width:
            raise ParseError(f"expected {width} values, found {len(row)}", r + offset)
        for c, cell in enumerate(row):
            try:
                out[r, c] = float(cell.strip())
            except ValueError:
                raise ParseError(f"value {cell!r} is not a number", r + offset, c + 1) from None
    return out


def read_partition(path) -> np.ndarray:
    """A label vector stored either as one row or as one column."""
    M = read_labels(path)
    if M.shape[0] == 1:
        return M[0]
    if M.shape[1] == 1:
        return M[:, 0]
    raise ParseError(f"{path} holds a {M.shape[0]} x {M.shape[1]} table, not a single label vector")


def write_matrix(path, M) -> Path:
    path = Path(path)
    np.savetxt(path, np.atleast_2d(M), delimiter=",", fmt=FLOAT_FORMAT)
    return path


def write_labels(path, labels) -> Path:
    path = Path(path)
    np.savetxt(path, np.atleast_2d(np.asarray(labels, dtype=np.int64)), delimiter=",", fmt="%d")
    return path


def _cell(v):
    if isinstance(v, float) or isinstance(v, np.floating):
        return FLOAT_FORMAT % v
    return str(v)


def write_table(path, rows: list[dict], columns: list[str] | None = None) -> Path:
    path = Path(path)
    columns = columns or (list(rows[0]) if rows else [])
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_cell(r[c]) for c in columns])
    return path


def read_table(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def write_json(path, obj) -> Path:
    path = Path(path)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
    return path


def manifest(subcommand: str, flags: dict, inputs: list, seed=None) -> dict:
    from . import __version__

    return {
        "subcommand": subcommand,
        "flags": {k: (str(v) if isinstance(v, Path) else v) for k, v in sorted(flags.items())},
        "seed": seed,
        "inputs": {str(p): digest(p) for p in inputs},
        "version": __version__,
    }
