"""Deterministic CSV and PGM emitters.

Numbers are written with at most nine significant digits, a ``.`` decimal
separator and no thousands separators; lines end in ``\\n``. Writers build the
whole document in memory and return bytes, so output is only emitted after
the computation has finished.
"""

from __future__ import annotations

import csv
import io
import logging
from collections.abc import Iterable, Sequence
from typing import Callable, Union

import numpy as np

from .coverage import CoverageGrid
from .registry import FunctionRegistry

__all__ = [
    "format_number",
    "csv_document",
    "heatmap_registry",
    "csv_heatmap",
    "pgm_heatmap",
    "read_pgm",
    "BINARY_FORMATS",
    "GRID_COLUMNS",
]

logger = logging.getLogger(__name__)

#: Columns of the coverage grid in CSV form
GRID_COLUMNS = ("x_m", "y_m", "rate_gbps", "serving_beam")
#: Largest gray level of a 16-bit PGM
PGM_MAXVAL = 65535
#: Heatmap formats that cannot be written to a terminal
BINARY_FORMATS = frozenset({"pgm"})

Cell = Union[str, int, float, np.integer, np.floating]
Heatmap = Callable[[CoverageGrid], bytes]


def format_number(value: Cell) -> str:
    """Format a value for CSV output.

    >>> format_number(0.000806551234567)
    '0.000806551235'
    >>> format_number(17)
    '17'
    """
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.9g}"


def csv_document(header: Sequence[str], rows: Iterable[Sequence[Cell]]) -> bytes:
    """Render a CSV document with a header row.

    :param header: The column names
    :param rows: The data rows
    :returns: The UTF-8 encoded document
    """
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows([format_number(cell) for cell in row] for row in rows)
    return buffer.getvalue().encode("utf-8")


def csv_heatmap(grid: CoverageGrid) -> bytes:
    """Write one row per cell, row-major from the ``(0, 0)`` corner, rates in Gb/s."""
    rows = (
        (grid.x[c], grid.y[r], grid.rate[r, c] / 1e9, grid.serving_beam[r, c])
        for r in range(grid.y.size)
        for c in range(grid.x.size)
    )
    return csv_document(GRID_COLUMNS, rows)


def pgm_heatmap(grid: CoverageGrid) -> bytes:
    """Write the rates as a 16-bit binary PGM.

    Gray levels map linearly from zero to the largest rate on the grid. The
    first image row is the ``y = 0`` edge of the floor.
    """
    peak = float(grid.rate.max())
    if peak > 0:
        levels = np.rint(grid.rate / peak * PGM_MAXVAL)
    else:
        logger.warning("every cell has a zero rate; writing a black heatmap")
        levels = np.zeros_like(grid.rate)
    height, width = grid.rate.shape
    header = f"P5\n{width} {height}\n{PGM_MAXVAL}\n".encode("ascii")
    return header + levels.astype(">u2").tobytes()


def read_pgm(data: bytes) -> tuple[int, np.ndarray]:
    """Decode a binary PGM written by :func:`pgm_heatmap`.

    :param data: The file contents
    :returns: A pair of the largest gray level and the image, one row per image line
    :raises ValueError: If the data is not a binary PGM
    """
    parts = data.split(maxsplit=4)
    if len(parts) < 5 or parts[0] != b"P5":
        raise ValueError("not a binary PGM")
    width, height, maxval = (int(part) for part in parts[1:4])
    offset = len(data) - width * height * (2 if maxval > 255 else 1)
    dtype = ">u2" if maxval > 255 else "u1"
    image = np.frombuffer(data, dtype=dtype, offset=offset).reshape(height, width)
    return maxval, image


#: Coverage grid formats, ``csv`` (default) or ``pgm``
heatmap_registry: FunctionRegistry[Heatmap] = FunctionRegistry(
    [csv_heatmap, pgm_heatmap], default=csv_heatmap, suffix="heatmap"
)
