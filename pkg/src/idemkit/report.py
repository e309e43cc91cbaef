"""Deterministic report rendering (JSON and delimited CSV)."""

from __future__ import annotations

import csv
import io
import json

SCHEMA_VERSION = 1


def render_json(report: dict) -> bytes:
    return (json.dumps(report, sort_keys=True, indent=2) + "\n").encode()


def render_csv(report: dict) -> bytes:
    """Flatten every certificate entry in the report into one row."""
    buf = io.StringIO(newline="")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["certificate", "entry", "lhs", "rhs", "advisory", "holds"])
    for cert in report.get("certificates", []):
        for entry in cert["entries"]:
            lhs, rhs = entry["lhs"], entry["rhs"]
            writer.writerow(
                [
                    cert["name"],
                    entry["name"],
                    lhs,
                    rhs,
                    entry.get("advisory", False),
                    _leq(lhs, rhs),
                ]
            )
    return buf.getvalue().encode()


def _leq(lhs, rhs) -> bool:
    from .core import _norm_from_json

    return bool(_norm_from_json(lhs) <= _norm_from_json(rhs))


def render_report(report: dict, fmt: str) -> bytes:
    if fmt == "json":
        return render_json(report)
    if fmt == "csv":
        return render_csv(report)
    raise ValueError(f"unknown report format {fmt!r}")
