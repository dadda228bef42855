"""CSV ingestion of bivariate censored data and CSV/JSON emission."""

from __future__ import annotations

import csv
import io
import json
import math
from typing import Iterable, Sequence, TextIO

from .censoring import IntervalObs, RightObs
from .errors import InvalidDatasetError
from .stats import BivariateData


class ParseError(InvalidDatasetError):
    def __init__(self, message: str, row: int | None = None, column: int | None = None):
        self.row = row
        self.column = column
        where = ""
        if row is not None:
            where = f"row {row}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)


def _rows(text: str) -> list[tuple[int, list[str]]]:
    out = []
    for lineno, row in enumerate(csv.reader(io.StringIO(text)), start=1):
        cells = [c.strip() for c in row]
        if not cells or all(c == "" for c in cells) or cells[0].startswith("#"):
            continue
        out.append((lineno, cells))
    if out and not _is_number(out[0][1][0]):
        out = out[1:]  # header
    if not out:
        raise ParseError("no data rows")
    return out


def _is_number(token: str) -> bool:
    try:
        float(token)
    except ValueError:
        return False
    return True


def _num(token: str, row: int, col: int) -> float:
    try:
        v = float(token)
    except ValueError:
        raise ParseError(f"{token!r} is not a number", row, col) from None
    if math.isnan(v):
        raise ParseError("NaN is not allowed", row, col)
    return v


def _flag(token: str, row: int, col: int) -> bool:
    if token not in ("0", "1"):
        raise ParseError(f"censoring indicator must be 0 or 1, got {token!r}", row, col)
    return token == "1"


def detect_type(rows: Sequence[tuple[int, list[str]]]) -> str:
    """``right`` for ``x,dx,y,dy`` rows, ``interval`` for ``lx,rx,ly,ry`` rows.

    Raises when the columns fit both layouts and no ``inf`` token or
    ``lx == rx`` pattern settles it.
    """
    flags_fit = all(r[1] in ("0", "1") and r[3] in ("0", "1") for _, r in rows)
    interval_hint = any(
        "inf" in (c.lower() for c in r) or r[0] == r[1] or r[2] == r[3] for _, r in rows
    )
    if flags_fit and not interval_hint:
        return "right"
    if interval_hint and not flags_fit:
        return "interval"
    if not flags_fit and not interval_hint:
        return "interval"
    raise ParseError("cannot tell right-censored from interval layout; pass --type")


def parse_dataset(text: str, kind: str | None = None) -> BivariateData:
    rows = _rows(text)
    for lineno, r in rows:
        if len(r) != 4:
            raise ParseError(f"expected 4 columns, found {len(r)}", lineno)
    if kind is None:
        kind = detect_type(rows)
    x, y = [], []
    for lineno, r in rows:
        try:
            if kind == "right":
                x.append(RightObs(_num(r[0], lineno, 1), _flag(r[1], lineno, 2)))
                y.append(RightObs(_num(r[2], lineno, 3), _flag(r[3], lineno, 4)))
            elif kind == "interval":
                x.append(IntervalObs.from_endpoints(_num(r[0], lineno, 1), _num(r[1], lineno, 2)))
                y.append(IntervalObs.from_endpoints(_num(r[2], lineno, 3), _num(r[3], lineno, 4)))
            else:
                raise ParseError(f"unknown data type {kind!r}")
        except ParseError:
            raise
        except InvalidDatasetError as exc:
            raise ParseError(str(exc), lineno) from None
    return BivariateData(tuple(x), tuple(y))


def read_dataset(path: str, kind: str | None = None) -> BivariateData:
    with open(path, newline="") as fh:
        return parse_dataset(fh.read(), kind)


def fmt(value) -> str:
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def write_csv(fh: TextIO, header: Sequence[str], rows: Iterable[Sequence], comment: str | None = None) -> None:
    if comment:
        fh.write(f"# {comment}\n")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])


def dump_json(obj: dict) -> str:
    # repr of a float round-trips exactly, so equal runs give equal bytes
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"
