"""Run summaries and table writers for the experiment commands."""
from __future__ import annotations

import csv
import io
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence

LOGGER = logging.getLogger(__name__)

CONVEXITY_HEADERS = [
    "trial",
    "s",
    "g",
    "second_difference",
    "lhs",
    "mid",
    "rhs",
    "verdict",
]

LIFTING_HEADERS = [
    "trial",
    "mode",
    "dim",
    "quotient_norm",
    "lifting_norm",
    "reference_norm",
    "cross_method_gap",
    "min_norm_slack",
    "min_log_slack",
    "min_competitor_slack",
    "unique",
]

COMPLETION_HEADERS = [
    "trial",
    "rows",
    "cols",
    "mu",
    "completed_norm",
    "parrott_bound",
    "search_improvement",
]


@dataclass(frozen=True)
class Check:
    suite: str
    ok: bool
    slack: float = math.inf


@dataclass
class SuiteTally:
    name: str
    passed: int = 0
    failed: int = 0
    skipped: int = 0
    worst_slack: float = math.inf

    def record(self, check: Check) -> None:
        if check.ok:
            self.passed += 1
        else:
            self.failed += 1
        self.worst_slack = min(self.worst_slack, check.slack)

    @property
    def total(self) -> int:
        return self.passed + self.failed + self.skipped

    @property
    def is_ok(self) -> bool:
        return self.failed == 0

    def to_payload(self) -> Dict[str, Any]:
        return {
            "passed": self.passed,
            "failed": self.failed,
            "skipped": self.skipped,
            "worst_slack": None if math.isinf(self.worst_slack) else self.worst_slack,
        }


@dataclass
class RunSummary:
    command: str
    config: Dict[str, Any]
    version: str
    suites: Dict[str, SuiteTally] = field(default_factory=dict)
    elapsed_seconds: Optional[float] = None

    def tally(self, name: str) -> SuiteTally:
        if name not in self.suites:
            self.suites[name] = SuiteTally(name)
        return self.suites[name]

    def record(self, checks: Iterable[Check]) -> None:
        for check in checks:
            self.tally(check.suite).record(check)

    def skip(self, suite: str) -> None:
        self.tally(suite).skipped += 1

    @property
    def is_ok(self) -> bool:
        return all(tally.is_ok for tally in self.suites.values())

    def to_payload(self) -> Dict[str, Any]:
        payload: Dict[str, Any] = {
            "command": self.command,
            "config": self.config,
            "version": self.version,
            "ok": self.is_ok,
            "suites": {name: tally.to_payload() for name, tally in sorted(self.suites.items())},
        }
        if self.elapsed_seconds is not None:
            payload["elapsed_seconds"] = self.elapsed_seconds
        return payload

    def to_json(self) -> str:
        return json.dumps(self.to_payload(), indent=2, sort_keys=True)


def format_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def render_csv(headers: Sequence[str], rows: Iterable[Mapping[str, Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(headers)
    for row in rows:
        writer.writerow([format_cell(row.get(header)) for header in headers])
    return buffer.getvalue()


def _json_safe(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def render_json(summary: RunSummary, headers: Sequence[str], rows: Iterable[Mapping[str, Any]]) -> str:
    table = [{header: _json_safe(row.get(header)) for header in headers} for row in rows]
    return json.dumps({"summary": summary.to_payload(), "rows": table}, indent=2, sort_keys=True)


def _write(path: Optional[Path], text: str) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    if not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def summary_path(out: Path) -> Path:
    return out.with_name(f"{out.stem}.summary.json")


def write_outputs(
    summary: RunSummary,
    headers: Sequence[str],
    rows: List[Mapping[str, Any]],
    out: Optional[str],
    output_format: str,
) -> None:
    """csv: table at ``out`` plus ``<stem>.summary.json`` next to it; json: one document."""
    path = Path(out) if out else None
    if output_format == "json":
        _write(path, render_json(summary, headers, rows) + "\n")
    else:
        _write(path, render_csv(headers, rows))
        if path is not None:
            _write(summary_path(path), summary.to_json() + "\n")
    if path is not None:
        LOGGER.info("Wrote %d row(s) to %s", len(rows), path)
