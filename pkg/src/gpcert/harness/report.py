"""Check records, suite reports and their json/csv/text serializations."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

FIELDS = ("id", "params", "residual", "passed", "wall_ms", "error")


@dataclass
class Record:
    id: str
    params: Dict[str, Any] = field(default_factory=dict)
    residual: Optional[float] = None  # residual or count
    passed: bool = True
    wall_ms: float = 0.0
    error: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "params": self.params,
            "residual": self.residual,
            "passed": self.passed,
            "wall_ms": self.wall_ms,
            "error": self.error,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Record":
        return cls(**{k: d.get(k) for k in FIELDS})


@dataclass
class Report:
    records: List[Record] = field(default_factory=list)
    config: Dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    def extend(self, recs):
        self.records.extend(recs)

    def summary(self) -> dict:
        return {
            "total": len(self.records),
            "failed": sum(not r.passed for r in self.records),
            "passed": self.passed,
        }

    def by_group(self) -> Dict[str, List[Record]]:
        out: Dict[str, List[Record]] = {}
        for r in self.records:
            out.setdefault(r.id.split(":", 1)[0], []).append(r)
        return out

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "records": [r.to_dict() for r in self.records],
            "summary": self.summary(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Report":
        return cls([Record.from_dict(r) for r in d.get("records", [])], d.get("config", {}))


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.3e}"
    return str(v)


def emit(report: Report, fmt: str = "json") -> str:
    if fmt == "json":
        return json.dumps(report.to_dict(), indent=2) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(FIELDS)
        for r in report.records:
            w.writerow(
                [
                    r.id,
                    json.dumps(r.params, sort_keys=True),
                    "" if r.residual is None else repr(r.residual),
                    int(r.passed),
                    f"{r.wall_ms:.1f}",
                    r.error or "",
                ]
            )
        return buf.getvalue()
    if fmt == "text":
        lines = []
        for r in report.records:
            tag = "PASS" if r.passed else "FAIL"
            extra = f"  error={r.error}" if r.error else ""
            lines.append(f"{tag}  {r.id:<40s} value={_fmt(r.residual):<11s} {r.wall_ms:9.1f} ms{extra}")
        s = report.summary()
        lines.append(f"-- {s['total']} records, {s['failed']} failed: {'PASS' if s['passed'] else 'FAIL'}")
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def parse_json(text: str) -> Report:
    return Report.from_dict(json.loads(text))


def write(report: Report, path: str, fmt: Optional[str] = None) -> None:
    if fmt is None:
        fmt = {"csv": "csv", "txt": "text"}.get(path.rsplit(".", 1)[-1], "json")
    with open(path, "w") as fh:
        fh.write(emit(report, fmt))
