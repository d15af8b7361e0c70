"""CSV ingestion and deterministic text serialization.

Input files are one observation per row, comma separated: an optional
header row, an optional leading label column (dates), the value always in
the last field.  Blank lines and lines starting with '#' are skipped.
Error messages cite the physical row number in the file.

Output text is deterministic: floats are printed with 17 significant
digits, so parsing a written file recovers the exact binary values and
equal runs produce byte-identical files.
"""

import json
import math

import numpy as np

from .errors import DomainError, InvalidParameterError, MalformedInputError
from .measures import ReturnSeries, log_returns

__all__ = [
    "read_series",
    "read_series_labeled",
    "fmt_value",
    "csv_text",
    "json_text",
]

_KINDS = ("returns", "prices")


def _is_number(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def _data_rows(path: str) -> list[tuple[int, list[str]]]:
    rows = []
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise MalformedInputError(f"cannot read {path}: {exc.strerror or exc}") from exc
    with fh:
        for rownum, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            rows.append((rownum, [f.strip() for f in line.split(",")]))
    if not rows:
        raise MalformedInputError(f"{path}: no data rows")
    return rows


def read_series_labeled(path: str, kind: str = "returns"):
    """Parse a series file; returns (series, labels or None).

    kind="prices" converts levels to log returns (labels shift by one so
    each return keeps the label of its end point).  Labels are only
    reported when every data row carries one.
    """
    if kind not in _KINDS:
        raise InvalidParameterError(f"kind must be one of {_KINDS}, got {kind!r}")
    rows = _data_rows(path)
    # a header is a first row whose value field is not a number; a leading
    # date column alone must not trigger this, hence the last-field test
    if not _is_number(rows[0][1][-1]):
        rows = rows[1:]
        if not rows:
            raise MalformedInputError(f"{path}: header but no data rows")

    values = np.empty(len(rows))
    labels: list[str] | None = [] if all(len(f) > 1 for _, f in rows) else None
    for i, (rownum, fields) in enumerate(rows):
        cell = fields[-1]
        if not _is_number(cell):
            raise MalformedInputError(f"{path}: non-numeric value {cell!r} at row {rownum}")
        v = float(cell)
        if not math.isfinite(v):
            raise MalformedInputError(f"{path}: non-finite value {cell!r} at row {rownum}")
        if kind == "prices" and v <= 0.0:
            raise DomainError(f"{path}: prices must be positive, got {cell} at row {rownum}")
        values[i] = v
        if labels is not None:
            labels.append(",".join(fields[:-1]))

    if kind == "prices":
        series = log_returns(values)
        return series, labels[1:] if labels is not None else None
    return ReturnSeries(values), labels


def read_series(path: str, kind: str = "returns") -> ReturnSeries:
    """Parse a series file, discarding any label column."""
    series, _ = read_series_labeled(path, kind)
    return series


# ---------------------------------------------------------------------------
# writing
# ---------------------------------------------------------------------------


def fmt_value(v) -> str:
    """Deterministic cell text: 17 significant digits for floats."""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def csv_text(header, rows, preamble: dict | None = None) -> str:
    """CSV with optional '# key=value' preamble lines above the header."""
    lines = [f"# {k}={fmt_value(v)}" for k, v in (preamble or {}).items()]
    lines.append(",".join(header))
    lines.extend(",".join(fmt_value(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return None if math.isnan(f) else f
    return obj


def json_text(payload: dict) -> str:
    """Two-space-indented JSON; NaN becomes null so any parser can read it."""
    return json.dumps(_jsonable(payload), indent=2) + "\n"
