"""Send/open/click/apply funnel metrics and control-vs-proposed comparison.

OSR and CTR divide by emails sent; AOR divides applications by emails opened.
A ratio with a zero denominator is reported as 0 so that empty plans still
produce a well-formed report. Outcomes must respect the funnel hierarchy:
an email can only be clicked if opened, and only convert if clicked.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

OUTCOMES_HEADER = ["email_id", "user_id", "opened", "clicked", "applied"]
REPORT_HEADER = ["metric", "control", "proposed", "change"]


class HierarchyError(ValueError):
    """An outcome violates applied => clicked => opened."""

    def __init__(self, email_id: str, message: str):
        self.email_id = email_id
        super().__init__(f"email {email_id!r}: {message}")


@dataclass(frozen=True)
class FunnelOutcome:
    email_id: str
    user_id: str
    opened: bool
    clicked: bool
    applied: bool


@dataclass(frozen=True)
class FunnelMetrics:
    sent: int
    opens: int
    clicks: int
    apps: int
    osr: float
    ctr: float
    aor: float


@dataclass(frozen=True)
class ComparisonRow:
    name: str
    key: str
    control: float
    proposed: float
    change: float | None  # (proposed - control) / control; None when control is 0
    is_count: bool


@dataclass(frozen=True)
class ComparisonReport:
    rows: tuple[ComparisonRow, ...]


def _ratio(numerator: int, denominator: int) -> float:
    return numerator / denominator if denominator else 0.0


def compute_funnel(outcomes: Iterable[FunnelOutcome]) -> FunnelMetrics:
    """Aggregate outcomes into counts and the three funnel ratios.

    Rejects the first outcome that breaks the hierarchy, naming its email id.
    """
    sent = opens = clicks = apps = 0
    for outcome in outcomes:
        if outcome.clicked and not outcome.opened:
            raise HierarchyError(outcome.email_id, "clicked but not opened")
        if outcome.applied and not outcome.clicked:
            raise HierarchyError(outcome.email_id, "applied but not clicked")
        sent += 1
        opens += outcome.opened
        clicks += outcome.clicked
        apps += outcome.applied
    return FunnelMetrics(
        sent=sent,
        opens=opens,
        clicks=clicks,
        apps=apps,
        osr=_ratio(opens, sent),
        ctr=_ratio(clicks, sent),
        aor=_ratio(apps, opens),
    )


def compare_report(control: FunnelMetrics, proposed: FunnelMetrics) -> ComparisonReport:
    """Five-row comparison (Total Apps, Total Sent, OSR, CTR, AOR) with relative change."""
    specs = [
        ("Total Apps", "total_apps", control.apps, proposed.apps, True),
        ("Total Sent", "total_sent", control.sent, proposed.sent, True),
        ("OSR", "osr", control.osr, proposed.osr, False),
        ("CTR", "ctr", control.ctr, proposed.ctr, False),
        ("AOR", "aor", control.aor, proposed.aor, False),
    ]
    rows = []
    for name, key, c, p, is_count in specs:
        change = (p - c) / c if c else None
        rows.append(ComparisonRow(name, key, c, p, change, is_count))
    return ComparisonReport(tuple(rows))


def format_report_text(report: ComparisonReport) -> str:
    """Plain-text table mirroring the five comparison rows plus a change column."""
    lines = [f"{'Metric':<12} {'Control':>12} {'Proposed':>12} {'Change':>10}"]
    lines.append("-" * len(lines[0]))
    for row in report.rows:
        if row.is_count:
            control, proposed = f"{int(row.control)}", f"{int(row.proposed)}"
        else:
            control, proposed = f"{row.control * 100:.2f}%", f"{row.proposed * 100:.2f}%"
        change = "n/a" if row.change is None else f"{row.change * 100:+.1f}%"
        lines.append(f"{row.name:<12} {control:>12} {proposed:>12} {change:>10}")
    return "\n".join(lines) + "\n"


def write_report(report: ComparisonReport, path: str | Path) -> None:
    """Machine-readable form: metric,control,proposed,change (one row per metric)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(REPORT_HEADER)
        for row in report.rows:
            control = str(int(row.control)) if row.is_count else f"{row.control:.6f}"
            proposed = str(int(row.proposed)) if row.is_count else f"{row.proposed:.6f}"
            change = "n/a" if row.change is None else f"{row.change:.6f}"
            writer.writerow([row.key, control, proposed, change])


def write_outcomes(outcomes: Sequence[FunnelOutcome], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(OUTCOMES_HEADER)
        for o in outcomes:
            writer.writerow([o.email_id, o.user_id, int(o.opened), int(o.clicked), int(o.applied)])


def read_outcomes(path: str | Path) -> list[FunnelOutcome]:
    path = Path(path)
    outcomes = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != OUTCOMES_HEADER:
            raise ValueError(f"{path.name}: expected header {','.join(OUTCOMES_HEADER)!r}")
        for row in reader:
            flags = []
            for raw in row[2:5]:
                if raw not in ("0", "1"):
                    raise ValueError(f"{path.name}: flag must be 0 or 1, got {raw!r}")
                flags.append(raw == "1")
            outcomes.append(FunnelOutcome(row[0], row[1], *flags))
    return outcomes
