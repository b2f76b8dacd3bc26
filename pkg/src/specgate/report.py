"""Scan reports and their JSON/CSV serialisation.

Floats are written with 17 significant digits so they read back bit for bit;
the unbounded value is written as the string ``"inf"``.  CSV output carries
the report metadata on a leading ``#`` comment line.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import math
import sys
from dataclasses import dataclass, field

from .errors import IoFailure


class Unbounded(enum.Enum):
    """Explicit ``+inf`` for statistics whose defining set is infeasible."""

    PLUS_INF = "inf"

    def __repr__(self):
        return "PLUS_INF"

    def __float__(self):
        return math.inf


PLUS_INF = Unbounded.PLUS_INF


@dataclass
class ReportRow:
    loc: tuple
    stats: dict


@dataclass
class ScanReport:
    rows: list[ReportRow] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def column(self, name: str) -> list:
        return [row.stats.get(name) for row in self.rows]

    def to_obj(self) -> dict:
        return {"meta": self.meta, "rows": [{"loc": list(r.loc), "stats": r.stats} for r in self.rows]}

    @classmethod
    def from_obj(cls, obj: dict) -> ScanReport:
        rows = [ReportRow(tuple(r["loc"]), {k: _decode(v) for k, v in r["stats"].items()}) for r in obj["rows"]]
        return cls(rows, _decode(obj.get("meta", {})))


def _decode(v):
    if v == "inf":
        return PLUS_INF
    if isinstance(v, dict):
        return {k: _decode(x) for k, x in v.items()}
    if isinstance(v, list):
        return [_decode(x) for x in v]
    return v


def format_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    text = format(x, ".17g")
    if not any(ch in text for ch in ".en"):
        text += ".0"
    return text


def dumps(obj) -> str:
    """Deterministic JSON text with 17-digit floats and ``"inf"`` sentinels."""
    if obj is None:
        return "null"
    if obj is PLUS_INF:
        return '"inf"'
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int) or (hasattr(obj, "dtype") and getattr(obj.dtype, "kind", "") in "iu"):
        return str(int(obj))
    if isinstance(obj, float) or (hasattr(obj, "dtype") and getattr(obj.dtype, "kind", "") == "f"):
        return format_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, enum.Enum):
        return json.dumps(obj.value)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {dumps(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(dumps(v) for v in obj) + "]"
    if hasattr(obj, "tolist"):
        return dumps(obj.tolist())
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _cell(v) -> str:
    if v is None:
        return ""
    if v is PLUS_INF:
        return "inf"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format_float(v).strip('"')
    return str(v)


def _uncell(text: str):
    if text == "":
        return None
    if text == "inf":
        return PLUS_INF
    if text in ("true", "false"):
        return text == "true"
    try:
        return int(text)
    except ValueError:
        return float(text)


def report_to_csv(report: ScanReport) -> str:
    names: list[str] = []
    for row in report.rows:
        for k in row.stats:
            if k not in names:
                names.append(k)
    buf = io.StringIO()
    buf.write("# meta: " + dumps(report.meta) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["step", "y"] + names)
    for i, row in enumerate(report.rows):
        loc = ";".join(_cell(x) for x in row.loc)
        writer.writerow([i, loc] + [_cell(row.stats.get(k)) for k in names])
    return buf.getvalue()


def report_from_csv(text: str) -> ScanReport:
    lines = text.splitlines()
    meta = {}
    if lines and lines[0].startswith("# meta: "):
        meta = _decode(json.loads(lines[0][len("# meta: "):]))
        lines = lines[1:]
    reader = csv.reader(lines)
    header = next(reader)
    rows = []
    for rec in reader:
        loc = tuple(_uncell(x) for x in rec[1].split(";")) if rec[1] else ()
        stats = {k: _uncell(v) for k, v in zip(header[2:], rec[2:]) if v != ""}
        rows.append(ReportRow(loc, stats))
    return ScanReport(rows, meta)


def write_report(report: ScanReport, path, fmt: str = "json") -> None:
    text = dumps(report.to_obj()) + "\n" if fmt == "json" else report_to_csv(report)
    write_text(path, text)


def read_report(path, fmt: str | None = None) -> ScanReport:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    if fmt is None:
        fmt = "json" if text.lstrip().startswith("{") else "csv"
    if fmt == "json":
        return ScanReport.from_obj(json.loads(text))
    return report_from_csv(text)


def write_text(path, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
