"""Check records, reports and their CSV/JSON serialisation."""

from __future__ import annotations

import csv
import io
import json
import math
import subprocess
from dataclasses import asdict, dataclass, field
from pathlib import Path

STATUSES = ("pass", "fail", "inconclusive", "unsupported")


def _num(x):
    """Deterministic text for numbers; ``None`` becomes an empty field."""
    if x is None:
        return ""
    if isinstance(x, (bool, str)):
        return str(x)
    if isinstance(x, int) or (hasattr(x, "dtype") and getattr(x.dtype, "kind", "") in "iu"):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def _jsonable(x):
    if isinstance(x, float) and not math.isfinite(x):
        return repr(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if hasattr(x, "item"):
        return _jsonable(x.item())
    return x


@dataclass
class Check:
    """One acceptance or consistency check."""

    check_id: str
    status: str
    estimate: float | None = None
    reference: float | None = None
    se_or_tol: float | None = None
    inputs: dict = field(default_factory=dict)
    detail: str = ""

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"unknown status {self.status!r}")

    @property
    def failed(self) -> bool:
        return self.status == "fail"


@dataclass
class Report:
    checks: list = field(default_factory=list)
    provenance: dict = field(default_factory=dict)

    def add(self, check: Check) -> Check:
        self.checks.append(check)
        return check

    @property
    def exit_code(self) -> int:
        return 1 if any(c.failed for c in self.checks) else 0

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["check_id", "status", "estimate", "reference", "se_or_tol", "inputs", "detail"])
        for c in self.checks:
            w.writerow([
                c.check_id, c.status, _num(c.estimate), _num(c.reference), _num(c.se_or_tol),
                json.dumps(_jsonable(c.inputs), sort_keys=True), c.detail,
            ])
        return buf.getvalue()

    def to_json(self) -> str:
        body = {"provenance": _jsonable(self.provenance), "checks": [_jsonable(asdict(c)) for c in self.checks]}
        return json.dumps(body, indent=2, sort_keys=True) + "\n"

    def write(self, path: str | Path, fmt: str = "csv") -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_csv() if fmt == "csv" else self.to_json())
        return path

    def summary_lines(self) -> list[str]:
        out = []
        for c in self.checks:
            line = f"[{c.status.upper():>12}] {c.check_id}"
            if c.detail:
                line += f"  {c.detail}"
            out.append(line)
        return out


def write_table(rows: list[dict], columns: list[str], path: str | Path | None, fmt: str = "csv") -> str:
    """Write ``rows`` as CSV (fixed column order) or JSON; returns the text."""
    if fmt == "json":
        text = json.dumps([_jsonable({k: r.get(k) for k in columns}) for r in rows], indent=2) + "\n"
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_num(r.get(k)) if not isinstance(r.get(k), str) else r.get(k) for k in columns])
        text = buf.getvalue()
    if path is not None:
        p = Path(path)
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(text)
    return text


def git_describe() -> str:
    try:
        res = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            capture_output=True, text=True, timeout=5, cwd=Path(__file__).resolve().parent,
        )
    except (OSError, subprocess.SubprocessError):
        return "unknown"
    return res.stdout.strip() or "unknown"
