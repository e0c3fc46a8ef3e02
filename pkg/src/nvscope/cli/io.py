"""Deterministic file output: atomic writes, fixed-precision CSV, canonical JSON."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile

import numpy as np


class CsvFormatError(ValueError):
    def __init__(self, message, line):
        super().__init__(f"line {line}: {message}")
        self.line = line


def atomic_write(path: str, data) -> None:
    """Write ``data`` (str or bytes) to ``path`` via a temp file and rename."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    if isinstance(data, str):
        data = data.encode("utf-8")
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def jsonable(x):
    """Plain-Python copy of ``x``; non-finite floats become None."""
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [jsonable(v) for v in x.tolist()]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    return x


def dumps(obj) -> str:
    return json.dumps(jsonable(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def fmt(x) -> str:
    return format(float(x), ".17g")


def write_csv(path: str, header, columns) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in zip(*columns):
        w.writerow([fmt(v) for v in row])
    atomic_write(path, buf.getvalue())


def read_csv(path: str):
    """(header, float array of shape (rows, cols)); at least two columns required."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise CsvFormatError("empty file, header row expected", 1)
    header = [h.strip() for h in rows[0]]
    if len(header) < 2:
        raise CsvFormatError("need an axis column and a value column", 1)
    try:
        float(header[0])
    except ValueError:
        pass
    else:
        raise CsvFormatError("header row missing", 1)
    data = []
    for k, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise CsvFormatError(f"expected {len(header)} fields, got {len(row)}", k)
        try:
            data.append([float(v) for v in row])
        except ValueError as exc:
            raise CsvFormatError(str(exc), k) from exc
    if not data:
        raise CsvFormatError("no data rows", 2)
    return header, np.array(data)
