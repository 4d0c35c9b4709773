"""Deterministic CSV readers and writers.

All floats are written with repr so values survive a round trip exactly;
files use LF line endings and `.` decimals regardless of locale. Metadata
travels in `# key=value` comment lines ahead of the header.
"""

import numpy as np

from .fuzzy_core import FuzzyNumber, RGrid

__all__ = [
    "CsvFormatError",
    "write_fuzzy_number",
    "read_fuzzy_number",
    "write_grid_function",
    "read_grid_function",
    "write_residual_report",
    "write_solution",
    "read_solution",
]


class CsvFormatError(ValueError):
    """A CSV file does not match the expected schema."""


def _fmt(v):
    return repr(float(v))


def _meta_value(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _write(path, header, rows, meta=None):
    with open(path, "w", newline="\n") as fh:
        for key in sorted(meta or {}):
            fh.write("# %s=%s\n" % (key, _meta_value(meta[key])))
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _read(path, expected_header):
    meta = {}
    rows = []
    header = None
    with open(path, "r") as fh:
        for line in fh:
            line = line.rstrip("\n").rstrip("\r")
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, _, val = body.partition("=")
                    meta[key.strip()] = val.strip()
                continue
            if header is None:
                header = [c.strip() for c in line.split(",")]
                if header != list(expected_header):
                    raise CsvFormatError(
                        "expected columns %s, found %s in %s"
                        % (",".join(expected_header), ",".join(header), path))
                continue
            parts = line.split(",")
            if len(parts) != len(expected_header):
                raise CsvFormatError(
                    "row with %d column(s) in %s, expected %d"
                    % (len(parts), path, len(expected_header)))
            try:
                rows.append([float(c) for c in parts])
            except ValueError:
                raise CsvFormatError("non-numeric value in %s: %r" % (path, line))
    if header is None:
        raise CsvFormatError("no header row in %s" % path)
    return meta, np.array(rows, dtype=float).reshape(len(rows), len(expected_header))


def write_fuzzy_number(path, fn):
    rows = zip(fn.rgrid.values, fn.lower, fn.upper)
    _write(path, ("r", "lower", "upper"), rows)


def read_fuzzy_number(path):
    """Read a level table; stacking is not enforced so callers can inspect it."""
    _, data = _read(path, ("r", "lower", "upper"))
    if not data.size:
        raise CsvFormatError("no data rows in %s" % path)
    rg = RGrid(data[:, 0])
    return FuzzyNumber(rg, data[:, 1], data[:, 2], check=False)


def write_grid_function(path, g):
    _write(path, ("x", "value"), zip(g.x, g.values))


def read_grid_function(path):
    from .frac_ops import GridFunction, XGrid
    _, data = _read(path, ("x", "value"))
    if data.shape[0] < 3:
        raise CsvFormatError("grid function needs at least 3 rows")
    xg = XGrid.from_nodes(data[:, 0])
    return GridFunction(xg, data[:, 1])


def write_residual_report(path, report, meta=None):
    rows = []
    with open(path, "w", newline="\n") as fh:
        for key in sorted(meta or {}):
            fh.write("# %s=%s\n" % (key, _meta_value(meta[key])))
        fh.write("equation_id,r,max_abs,l2,pass\n")
        for row in report.rows:
            fh.write("%s,%s,%s,%s,%d\n" % (row.equation_id, _fmt(row.r),
                                           _fmt(row.max_abs), _fmt(row.l2),
                                           1 if row.passed else 0))
    return rows


def write_solution(path, levels, xnodes, lower, upper, meta=None):
    """Level-major trajectory table `r,x,lower,upper` with a metadata header."""
    rows = []
    for k, r in enumerate(levels):
        for j, x in enumerate(xnodes):
            rows.append((r, x, lower[k][j], upper[k][j]))
    _write(path, ("r", "x", "lower", "upper"), rows, meta=meta)


def read_solution(path):
    """Read a trajectory table back as (meta, levels, xnodes, lower, upper)."""
    meta, data = _read(path, ("r", "x", "lower", "upper"))
    if not data.size:
        raise CsvFormatError("no data rows in %s" % path)
    levels = np.unique(data[:, 0])
    xnodes = np.unique(data[:, 1])
    nr, nx = levels.size, xnodes.size
    if nr * nx != data.shape[0]:
        raise CsvFormatError("trajectory table in %s is not a full r-x grid" % path)
    lower = np.empty((nr, nx))
    upper = np.empty((nr, nx))
    ri = np.searchsorted(levels, data[:, 0])
    xi = np.searchsorted(xnodes, data[:, 1])
    lower[ri, xi] = data[:, 2]
    upper[ri, xi] = data[:, 3]
    return meta, levels, xnodes, lower, upper
