"""Plain-text matrices and plot tables.

Matrix files hold one row per line, entries separated by whitespace or
commas, with ``#`` comment lines allowed anywhere. Values are written with
17 significant digits so a write/read cycle returns the same bits.
"""
import io
import logging
import warnings
from pathlib import Path

import numpy as np

from ..exceptions import InvalidInputError

logger = logging.getLogger(__name__)

MATRIX_FORMAT = "%.17g"


def _load_lines(lines, source):
    try:
        with warnings.catch_warnings():
            # An all-comment file is reported below, not as a numpy warning.
            warnings.simplefilter("ignore", UserWarning)
            matrix = np.loadtxt(
                (line.replace(",", " ") for line in lines), dtype=np.float64, comments="#", ndmin=2,
            )
    except ValueError as exc:
        raise InvalidInputError(f"{source}: {exc}") from exc
    if matrix.size == 0:
        raise InvalidInputError(f"{source}: no matrix rows found")
    if not np.all(np.isfinite(matrix)):
        raise InvalidInputError(f"{source}: matrix contains NaN or infinite entries")
    return matrix


def parse_matrix(text, source="<string>"):
    return _load_lines(text.splitlines(), source)


def read_matrix(path):
    path = Path(path)
    try:
        with path.open(encoding="utf-8") as fh:
            matrix = _load_lines(fh, str(path))
    except OSError as exc:
        raise InvalidInputError(f"cannot read {path}: {exc.strerror or exc}") from exc
    logger.debug("read %dx%d matrix from %s", *matrix.shape, path)
    return matrix


def format_matrix(matrix, comment=None):
    buffer = io.StringIO()
    np.savetxt(buffer, np.asarray(matrix, dtype=np.float64), fmt=MATRIX_FORMAT, header=comment or "")
    return buffer.getvalue()


def write_matrix(path, matrix, comment=None):
    np.savetxt(
        path, np.asarray(matrix, dtype=np.float64), fmt=MATRIX_FORMAT, header=comment or "", encoding="utf-8",
    )


def format_value(value, digits):
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.{digits}g}"


def _table_cells(header, rows, digits):
    for row in rows:
        if len(row) != len(header):
            raise ValueError(f"row has {len(row)} values for {len(header)} columns")
    cells = [[format_value(value, digits) for value in row] for row in rows]
    return np.array(cells, dtype=str).reshape(len(cells), len(header))


def format_table(header, rows, digits=12):
    """Header line followed by one whitespace-delimited line per row."""
    buffer = io.StringIO()
    np.savetxt(buffer, _table_cells(header, rows, digits), fmt="%s", header=" ".join(header), comments="")
    return buffer.getvalue()


def write_table(path, header, rows, digits=12):
    np.savetxt(
        path, _table_cells(header, rows, digits), fmt="%s", header=" ".join(header), comments="", encoding="utf-8",
    )
    logger.info("wrote %d rows to %s", len(rows), path)
