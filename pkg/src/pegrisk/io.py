"""
CSV ingestion, JSON documents and plot-data emission.

Every writer goes through :func:`atomic_write`, which writes a sibling temp
file and renames it into place, so a failed command never leaves a partial
file behind. Floats are written with ``repr``, the shortest string that
parses back to the same double.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataFormatError
from .series import BivariateSeries

log = logging.getLogger(__name__)

CSV_HEADER = ("date", "peg", "green")


def format_float(x) -> str:
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"non-finite value {x!r} cannot be written")
    return repr(x)


def atomic_write(path, text: str) -> None:
    path = Path(path)
    directory = path.parent if str(path.parent) else Path(".")
    try:
        fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=directory)
    except OSError as exc:
        raise ConfigError(f"cannot write {path}: {exc.strerror or exc}") from exc
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def _parse_float(text: str, line: int, column: str) -> float:
    t = text.strip()
    if not t or "," in t or "_" in t:
        raise DataFormatError(f"bad {column} value {text!r}", line=line)
    try:
        value = float(t)
    except ValueError:
        raise DataFormatError(f"bad {column} value {text!r}", line=line) from None
    if not math.isfinite(value):
        raise DataFormatError(f"{column} value must be finite, got {text!r}", line=line)
    return value


def _parse_date(text: str, line: int) -> np.datetime64:
    t = text.strip()
    if len(t) != 10 or t[4] != "-" or t[7] != "-":
        raise DataFormatError(f"date {text!r} is not YYYY-MM-DD", line=line)
    try:
        return np.datetime64(t, "D")
    except ValueError:
        raise DataFormatError(f"date {text!r} is not a valid calendar date", line=line) from None


def read_csv(path) -> BivariateSeries:
    """Read a ``date,peg,green`` file into a :class:`BivariateSeries`."""
    path = Path(path)
    try:
        fh = open(path, encoding="utf-8", newline="")
    except OSError as exc:
        raise DataFormatError(f"cannot open {path}: {exc.strerror or exc}") from exc
    dates, peg, green = [], [], []
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != CSV_HEADER:
            raise DataFormatError(f"header must be exactly {','.join(CSV_HEADER)}", line=1)
        for row in reader:
            line = reader.line_num
            if not row:
                continue
            if len(row) != 3:
                raise DataFormatError(f"expected 3 fields, got {len(row)}", line=line)
            d = _parse_date(row[0], line)
            if dates and d == dates[-1]:
                raise DataFormatError(f"duplicate date {row[0].strip()}", line=line)
            if dates and d < dates[-1]:
                raise DataFormatError(f"date {row[0].strip()} is earlier than the previous row", line=line)
            dates.append(d)
            peg.append(_parse_float(row[1], line, "peg"))
            green.append(_parse_float(row[2], line, "green"))
    if not dates:
        raise DataFormatError(f"{path} has no data rows")
    log.info("read %d rows from %s (%s to %s)", len(dates), path, dates[0], dates[-1])
    return BivariateSeries(np.array(dates, dtype="datetime64[D]"), np.array(peg), np.array(green))


def csv_text(header, rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(c if isinstance(c, str) else format_float(c) for c in row))
    return "\n".join(lines) + "\n"


def write_csv(pair: BivariateSeries, path) -> None:
    rows = ((str(d), p, g) for d, p, g in zip(pair.dates, pair.peg, pair.green))
    atomic_write(path, csv_text(CSV_HEADER, rows))


def to_json(document: dict) -> str:
    """Canonical JSON: sorted keys, two-space indent, no NaN or infinity."""
    return json.dumps(document, indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(document: dict, path) -> None:
    atomic_write(path, to_json(document))


def read_json(path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror or exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc
