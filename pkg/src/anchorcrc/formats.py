"""Reading counts/records files and rendering reports.

Counts documents are flat key-value files, either JSON or ``key = value``
lines::

    n15 = 169
    n2 = 12
    n4 = 52
    n6 = 19
    n37 = 777
    n_tot = 1029

Records files are CSV with header ``id, stream1_positive, in_anchor,
anchor_result`` plus optional ``stratum`` and ``validated`` columns.
"""

from __future__ import annotations

import csv
import io
import json
import math
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path
from typing import Optional

from .model import CaptureRecord, CellCounts5, EstimateReport, ValidationError

COUNT_KEYS = ("n15", "n2", "n4", "n6", "n37", "n_tot")
NA = "NA"


def _read_text(source) -> str:
    is_literal = isinstance(source, str) and ("\n" in source or source.lstrip().startswith("{"))
    if isinstance(source, Path) or (isinstance(source, str) and not is_literal):
        path = Path(source)
        try:
            return path.read_text()
        except FileNotFoundError:
            raise ValidationError(f"input file not found: {path}") from None
    return str(source)


def _parse_int(key: str, raw) -> int:
    if isinstance(raw, bool):
        raise ValidationError(f"{key} must be an integer, got {raw!r}")
    if isinstance(raw, int):
        return raw
    if isinstance(raw, float) and raw.is_integer():
        return int(raw)
    try:
        return int(str(raw).strip())
    except ValueError:
        raise ValidationError(f"{key} must be an integer, got {raw!r}") from None


def parse_counts(source) -> CellCounts5:
    """Parse a counts document from a path or literal text."""
    text = _read_text(source).strip()
    if text.startswith("{"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"malformed JSON counts document: {exc}") from None
        if not isinstance(doc, dict):
            raise ValidationError("counts document must be a flat object")
    else:
        doc = {}
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            sep = "=" if "=" in line else ":"
            if sep not in line:
                raise ValidationError(f"line {lineno}: expected 'key = value', got {line!r}")
            key, value = (part.strip() for part in line.split(sep, 1))
            doc[key] = value
    missing = [k for k in COUNT_KEYS if k not in doc]
    if missing:
        raise ValidationError(f"counts document is missing keys: {', '.join(missing)}")
    values = {k: _parse_int(k, doc[k]) for k in COUNT_KEYS}
    return CellCounts5(**values)


def render_counts(counts: CellCounts5, fmt: str = "json") -> str:
    if fmt == "json":
        return json.dumps(counts.to_dict(), indent=2) + "\n"
    if fmt == "kv":
        return "".join(f"{k} = {v}\n" for k, v in counts.to_dict().items())
    raise ValidationError(f"unknown counts format {fmt!r}")


_TRUE = {"1", "true", "t", "yes", "y"}
_FALSE = {"0", "false", "f", "no", "n"}


def _parse_bool(value: str, column: str, lineno: int) -> Optional[bool]:
    v = (value or "").strip().lower()
    if v == "":
        return None
    if v in _TRUE:
        return True
    if v in _FALSE:
        return False
    raise ValidationError(f"line {lineno}: column {column!r} has non-boolean value {value!r}")


def parse_records(source, stratum_column: str = "stratum", with_exclusions: bool = False):
    """Parse a records CSV into :class:`CaptureRecord` objects.

    Rows with ``validated`` false keep their anchor data but lose their
    Stream-1 flag. With ``with_exclusions=True`` the number of such rows is
    returned alongside the records.
    """
    text = _read_text(source)
    reader = csv.DictReader(io.StringIO(text))
    header = [h.strip() for h in (reader.fieldnames or [])]
    required = ("id", "stream1_positive", "in_anchor", "anchor_result")
    missing = [c for c in required if c not in header]
    if missing:
        raise ValidationError(f"records header is missing columns: {', '.join(missing)}")
    reader.fieldnames = header

    records, seen, excluded = [], set(), 0
    for lineno, row in enumerate(reader, start=2):
        if None in row or any(row.get(c) is None for c in required):
            raise ValidationError(f"line {lineno}: wrong number of fields")
        rid = row["id"].strip()
        if not rid:
            raise ValidationError(f"line {lineno}: empty id")
        if rid in seen:
            raise ValidationError(f"line {lineno}: duplicate id {rid!r}")
        seen.add(rid)
        s1 = _parse_bool(row["stream1_positive"], "stream1_positive", lineno)
        in_anchor = _parse_bool(row["in_anchor"], "in_anchor", lineno)
        if s1 is None or in_anchor is None:
            raise ValidationError(f"line {lineno}: stream1_positive and in_anchor are required")
        result = _parse_bool(row["anchor_result"], "anchor_result", lineno)
        if in_anchor and result is None:
            raise ValidationError(f"line {lineno}: anchor_result missing for an anchor-sampled record")
        if not in_anchor and result is not None:
            raise ValidationError(f"line {lineno}: anchor_result given for a record not in the anchor")
        if "validated" in header:
            validated = _parse_bool(row["validated"], "validated", lineno)
            if s1 and validated is False:
                s1 = False
                excluded += 1
        stratum = None
        if stratum_column in header:
            stratum = (row[stratum_column] or "").strip() or None
        records.append(CaptureRecord(rid, s1, in_anchor, result, stratum))
    if with_exclusions:
        return records, excluded
    return records


def round_half_away(x: float, digits: int = 1) -> str:
    """Decimal rounding with ties away from zero, as in published tables."""
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return NA
    q = Decimal(1).scaleb(-digits)
    return str(Decimal(repr(float(x))).quantize(q, rounding=ROUND_HALF_UP))


def _interval_str(lo: float, hi: float) -> str:
    return f"[{round_half_away(lo)}, {round_half_away(hi)}]"


def render_reports(reports: list[EstimateReport], fmt: str = "json") -> str:
    """Render estimate reports: JSON and CSV at full precision, markdown
    rounded to one decimal."""
    if fmt == "json":
        return json.dumps([r.to_dict() for r in reports], indent=2) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["method", "quantity", "variant", "value", "lower", "upper"])
        for r in reports:
            writer.writerow([r.method, "point", "", repr(r.point_N), "", ""])
            for k, v in r.se.items():
                writer.writerow([r.method, "se", k, repr(v), "", ""])
            for k, iv in r.intervals.items():
                writer.writerow([r.method, "interval", k, "", repr(iv.lower), repr(iv.upper)])
            for d in r.diagnostics:
                writer.writerow([r.method, "diagnostic", d, "", "", ""])
        return buf.getvalue()
    if fmt == "markdown":
        lines = ["| Estimator | N [SE] | Intervals |", "|---|---|---|"]
        for r in reports:
            ses = ", ".join(f"[{round_half_away(v)}]" for v in r.se.values())
            ivs = "; ".join(
                f"{k} {_interval_str(iv.lower, iv.upper)}" for k, iv in r.intervals.items()
            )
            lines.append(f"| {r.method} | {round_half_away(r.point_N)} {ses} | {ivs} |")
        diags = [(r.method, d) for r in reports for d in r.diagnostics]
        if diags:
            lines += ["", "Diagnostics:"] + [f"- {m}: {d}" for m, d in diags]
        return "\n".join(lines) + "\n"
    raise ValidationError(f"unknown output format {fmt!r}")


def _num(x: float, digits: int = 1) -> str:
    return round_half_away(x, digits)


def _json_safe(obj):
    if isinstance(obj, float) and math.isnan(obj):
        return None
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    return obj


def render_summary(summary, fmt: str = "markdown") -> str:
    """Render a simulation summary in the Mean (SD) [avg. SE] /
    CI coverage [avg. width] layout. NaN (e.g. SD of one replication)
    becomes ``NA`` in text formats and ``null`` in JSON."""
    if fmt == "json":
        return json.dumps(_json_safe(summary.to_dict()), indent=2) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["estimator", "statistic", "variant", "value"])
        for name, est in summary.estimators.items():
            writer.writerow([name, "mean", "", repr(est.mean)])
            writer.writerow([name, "sd", "", NA if math.isnan(est.sd) else repr(est.sd)])
            for k, v in est.avg_se.items():
                writer.writerow([name, "avg_se", k, repr(v)])
            for k, v in est.coverage.items():
                writer.writerow([name, "coverage", k, repr(v)])
            for k, v in est.avg_width.items():
                writer.writerow([name, "avg_width", k, repr(v)])
        for k, v in summary.fallback_counts.items():
            writer.writerow(["", "fallback_count", k, v])
        return buf.getvalue()
    if fmt == "markdown":
        s = summary.scenario
        lines = [
            f"Scenario {s.name or '(custom)'}: N_tot={s.n_tot}, N={s.n_true}, "
            f"anchor={s.anchor_size}, replications={summary.replications}",
            "",
            "| Estimator | Mean (SD) [avg. SE] | CI coverage [avg. width] |",
            "|---|---|---|",
        ]
        for name, est in summary.estimators.items():
            ses = ", ".join(f"[{_num(v)}]" for v in est.avg_se.values())
            cov = "; ".join(
                f"{k} {_num(est.coverage[k], 3)} [{_num(est.avg_width[k])}]"
                for k in est.coverage
            )
            lines.append(f"| {name} | {_num(est.mean)} ({_num(est.sd)}) {ses} | {cov} |")
        if summary.fallback_counts:
            lines += ["", "Fallback incidence:"]
            lines += [f"- {k}: {v}" for k, v in summary.fallback_counts.items()]
        return "\n".join(lines) + "\n"
    raise ValidationError(f"unknown output format {fmt!r}")
