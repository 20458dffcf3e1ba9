"""CSV and JSON plumbing for the command line tool.

CSV dialect: comma separated, a header row of column names, one observation
per row, plain decimal numbers.  Matrices are written with 17 significant
digits so a write/read round trip reproduces every float64 exactly.
"""

import csv
import datetime
import json
from pathlib import Path

import numpy as np

from . import __version__
from .errors import DimensionMismatch

FLOAT_FORMAT = "%.17g"


class InputError(ValueError):
    """Malformed or inconsistent input file."""


def _is_number(text):
    try:
        float(text)
        return True
    except ValueError:
        return False


def read_table(path, require_header=True):
    """Return ``(names, values)`` from a numeric CSV file.

    With ``require_header=False`` a first row that parses as numbers is
    treated as data and generic names are generated.
    """
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise InputError(f"{path} is empty")
    first = [c.strip() for c in rows[0]]
    if all(_is_number(c) for c in first):
        if require_header:
            raise InputError(f"{path}: header row of column names required")
        names = [f"V{j + 1}" for j in range(len(first))]
        body = rows
    else:
        names = first
        body = rows[1:]
    width = len(names)
    values = np.empty((len(body), width))
    for i, row in enumerate(body):
        if len(row) != width:
            raise InputError(f"{path}: row {i + 1} has {len(row)} fields, expected {width}")
        try:
            values[i] = [float(c) for c in row]
        except ValueError as exc:
            raise InputError(f"{path}: row {i + 1}: {exc}") from exc
    if not np.all(np.isfinite(values)):
        raise InputError(f"{path}: non-finite values")
    return names, values


def read_design(path):
    from .knockoffs import DesignMatrix
    names, values = read_table(path)
    if values.shape[0] < 2:
        raise InputError(f"{path}: need at least two observations")
    return DesignMatrix(values, column_names=names)


def read_response(path, n=None):
    from .knockoffs import ResponseVector
    _, values = read_table(path, require_header=False)
    if values.shape[1] != 1:
        raise InputError(f"{path}: response must have exactly one column")
    if n is not None and values.shape[0] != n:
        raise DimensionMismatch(f"response has {values.shape[0]} rows, design has {n}")
    return ResponseVector(values[:, 0])


def read_sigma(path, p):
    _, values = read_table(path, require_header=False)
    if values.shape != (p, p):
        raise DimensionMismatch(f"sigma in {path} is {values.shape[0]}x{values.shape[1]}, "
                                f"expected {p}x{p}")
    return values


def write_matrix(path, values, names):
    values = np.asarray(values, dtype=float)
    with Path(path).open("w", newline="") as fh:
        fh.write(",".join(names) + "\n")
        for row in values:
            fh.write(",".join(FLOAT_FORMAT % v for v in row) + "\n")


def write_rows(path, header, rows):
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow(["" if v is None else (repr(v) if isinstance(v, float) else v)
                        for v in r])


def _default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not np.isfinite(obj):
        return None
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, np.generic):
        return _clean(obj.item())
    if isinstance(obj, float) and not np.isfinite(obj):
        return None
    return obj


def dumps(doc):
    return json.dumps(_clean(doc), indent=2, sort_keys=True, default=_default) + "\n"


def write_json(path, doc):
    Path(path).write_text(dumps(doc))


def manifest(command, config, seed, input_paths=(), output_paths=()):
    """Provenance block embedded in every output document."""
    return {
        "command": command,
        "config": config,
        "input_paths": [str(p) for p in input_paths],
        "output_paths": [str(p) for p in output_paths],
        "seed": seed,
        "tool_version": __version__,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }
