"""Result tables and their CSV / SVG serialization."""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass

import numpy as np

from ..errors import EmptyTable, ParseError, UnsupportedFormat

FORMATS = ("csv", "svg")
_HEADER = re.compile(r"# (?P<key>[^:]+):(?: (?P<value>.*))?$", re.DOTALL)


@dataclass(frozen=True, eq=False)
class ResultTable:
    """Rectangular float table with an ordered provenance header."""

    columns: tuple[str, ...]
    rows: np.ndarray
    header: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=float)
        if rows.size == 0:
            rows = rows.reshape(0, len(self.columns))
        if rows.ndim != 2 or rows.shape[1] != len(self.columns):
            raise ValueError(f"rows of shape {rows.shape} do not match {len(self.columns)} columns")
        if not np.all(np.isfinite(rows)):
            raise ValueError("result tables hold finite entries only")
        rows.setflags(write=False)
        object.__setattr__(self, "columns", tuple(self.columns))
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "header", tuple((str(k), str(v)) for k, v in self.header))

    def column(self, name: str) -> np.ndarray:
        return self.rows[:, self.columns.index(name)]

    def meta(self, key: str, default: str | None = None) -> str | None:
        return next((v for k, v in self.header if k == key), default)

    def __eq__(self, other):
        if not isinstance(other, ResultTable):
            return NotImplemented
        return (self.columns == other.columns and self.header == other.header
                and self.rows.shape == other.rows.shape
                and self.rows.tobytes() == other.rows.tobytes())

    def __len__(self):
        return len(self.rows)


def to_csv(table: ResultTable) -> str:
    buf = io.StringIO()
    for key, value in table.header:
        buf.write(f"# {key}: {value}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    writer.writerows([format(v, ".17g") for v in row] for row in table.rows.tolist())
    return buf.getvalue()


def read_table(text: str) -> ResultTable:
    """Inverse of the CSV emitter; values round-trip bit-exactly."""
    header, body = [], []
    for lineno, line in enumerate(text.split("\n"), 1):
        line = line.removesuffix("\r")
        if line.startswith("#"):
            match = _HEADER.match(line)
            if match is None:
                raise ParseError(f"line {lineno}: header line without 'key: value'")
            header.append((match["key"], match["value"] or ""))
        elif line.strip():
            body.append((lineno, line))
    if not body:
        raise ParseError("no column header row")
    columns = next(csv.reader([body[0][1]]))
    rows = []
    for lineno, line in body[1:]:
        cells = next(csv.reader([line]))
        if len(cells) != len(columns):
            raise ParseError(f"line {lineno}: {len(cells)} cells, expected {len(columns)}")
        try:
            rows.append([float(c) for c in cells])
        except ValueError as exc:
            raise ParseError(f"line {lineno}: {exc}") from None
    return ResultTable(tuple(columns), np.array(rows, dtype=float).reshape(len(rows), len(columns)),
                       tuple(header))


def emit(table: ResultTable, fmt: str = "csv") -> bytes:
    """Serialize ``table`` as CSV or as an SVG line chart."""
    if fmt not in FORMATS:
        raise UnsupportedFormat(f"unsupported format {fmt!r}; expected one of {', '.join(FORMATS)}")
    if len(table) == 0:
        raise EmptyTable("refusing to emit a table with no rows")
    if fmt == "csv":
        return to_csv(table).encode("utf-8")
    from .plotting import render_svg

    return render_svg(table)
