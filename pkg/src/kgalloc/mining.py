"""Event-log parsing and resource-profile mining.

The simulator's event log (one row per lifecycle transition) is parsed back
into per-task records, from which three simple indicators are derived:
seniority (volume and breadth of completed work), expertise (share of work
on one case-attribute value), and permissions (observed activity execution).
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from fractions import Fraction

from .graph import GraphUpdate
from .terms import Triple, ident
from .vocab import CAN_BE_EXECUTED_BY, EXPERT_FOR, SENIORITY

LOG_COLUMNS = (
    "case_id",
    "task_id",
    "activity",
    "resource",
    "lifecycle",
    "timestamp",
    "application_type",
    "loan_goal",
    "requested_amount",
)

LIFECYCLES = ("enabled", "started", "completed")

EXPERTISE_ATTRIBUTES = ("ApplicationType", "LoanGoal")


class EventLogFormatError(ValueError):
    """The file is empty or its header is missing required columns."""


@dataclass(frozen=True)
class EventRecord:
    """One completed task: who did what, when, and for which case."""

    case_id: str
    task_id: str
    activity: str
    resource: str
    start: int
    end: int
    application_type: str
    loan_goal: str
    requested_amount: Decimal


@dataclass(frozen=True)
class Reject:
    where: str  # row number or task id
    reason: str


@dataclass
class LogParseResult:
    records: list[EventRecord]
    rejects: list[Reject]


def parse_event_log(source) -> LogParseResult:
    """Parse lifecycle rows into completed-task records plus a rejects report.

    Invalid rows and inconsistent task timelines are collected, never
    silently dropped. Tasks without a `completed` row are in-flight and
    yield no record.
    """
    if isinstance(source, str):
        with open(source, "r", encoding="utf-8", newline="") as handle:
            return parse_event_log(handle)
    reader = csv.DictReader(source)
    if reader.fieldnames is None:
        raise EventLogFormatError("empty event log file")
    missing = [c for c in LOG_COLUMNS if c not in reader.fieldnames]
    if missing:
        raise EventLogFormatError(f"missing columns: {', '.join(missing)}")

    rejects: list[Reject] = []
    started: dict[str, int] = {}
    completed: list[dict] = []
    for row_no, row in enumerate(reader, start=2):
        problem = _row_problem(row)
        if problem:
            rejects.append(Reject(f"row {row_no}", problem))
            continue
        lifecycle = row["lifecycle"]
        task_id = row["task_id"]
        if lifecycle == "started":
            started[task_id] = int(row["timestamp"])
        elif lifecycle == "completed":
            completed.append(row)

    records: list[EventRecord] = []
    for row in completed:
        task_id = row["task_id"]
        end = int(row["timestamp"])
        start = started.get(task_id, end)
        if end < start:
            rejects.append(Reject(task_id, f"end {end} before start {start}"))
            continue
        try:
            amount = Decimal(row["requested_amount"])
        except InvalidOperation:
            rejects.append(
                Reject(task_id, f"bad requested_amount {row['requested_amount']!r}")
            )
            continue
        records.append(
            EventRecord(
                case_id=row["case_id"],
                task_id=task_id,
                activity=row["activity"],
                resource=row["resource"],
                start=start,
                end=end,
                application_type=row["application_type"],
                loan_goal=row["loan_goal"],
                requested_amount=amount,
            )
        )
    return LogParseResult(records=records, rejects=rejects)


def _row_problem(row: dict) -> str | None:
    for column in ("case_id", "task_id", "activity", "lifecycle", "timestamp"):
        if not (row.get(column) or "").strip():
            return f"empty {column}"
    lifecycle = row["lifecycle"]
    if lifecycle not in LIFECYCLES:
        return f"unknown lifecycle {lifecycle!r}"
    try:
        int(row["timestamp"])
    except ValueError:
        return f"bad timestamp {row['timestamp']!r}"
    if lifecycle in ("started", "completed") and not (row.get("resource") or "").strip():
        return f"{lifecycle} row without resource"
    return None


def write_event_records(records, destination):
    """Write records back out as started/completed lifecycle rows."""
    if isinstance(destination, str):
        with open(destination, "w", encoding="utf-8", newline="") as handle:
            write_event_records(records, handle)
            return
    writer = csv.writer(destination)
    writer.writerow(LOG_COLUMNS)
    for r in records:
        base = [r.case_id, r.task_id, r.activity, r.resource]
        attrs = [r.application_type, r.loan_goal, str(r.requested_amount)]
        writer.writerow(base + ["started", str(r.start)] + attrs)
        writer.writerow(base + ["completed", str(r.end)] + attrs)


def dumps_event_records(records) -> str:
    out = io.StringIO()
    write_event_records(records, out)
    return out.getvalue()


DEFAULT_SENIORITY_LEVELS = ("Low", "Medium", "High")
DEFAULT_TERTILES = (Fraction(1, 3), Fraction(2, 3))


def derive_seniority(
    records,
    levels=DEFAULT_SENIORITY_LEVELS,
    tertiles=DEFAULT_TERTILES,
) -> GraphUpdate:
    """One functional `seniority` triple per observed resource.

    Indicator per resource: completed-task count normalized by the maximum,
    averaged with activity breadth (distinct activities over all observed
    activities). Resources are then placed by tie-averaged rank position;
    the tertile boundaries themselves round up to the higher level.
    """
    if not records:
        raise ValueError("derive_seniority needs at least one record")
    counts: dict[str, int] = {}
    breadth: dict[str, set[str]] = {}
    activities: set[str] = set()
    for r in records:
        counts[r.resource] = counts.get(r.resource, 0) + 1
        breadth.setdefault(r.resource, set()).add(r.activity)
        activities.add(r.activity)
    max_count = max(counts.values())
    indicator = {
        resource: Fraction(counts[resource], max_count) / 2
        + Fraction(len(breadth[resource]), len(activities)) / 2
        for resource in counts
    }

    positions = _rank_positions(indicator)
    low, high = tertiles
    additions = []
    for resource in sorted(indicator):
        pos = positions[resource]
        if pos >= high:
            level = levels[2]
        elif pos >= low:
            level = levels[1]
        else:
            level = levels[0]
        additions.append(Triple(ident(resource), SENIORITY, ident(level)))
    return GraphUpdate(
        additions=additions,
        provenance=f"mined seniority from {len(records)} completed tasks",
    )


def _rank_positions(indicator: dict[str, Fraction]) -> dict[str, Fraction]:
    """Tie-averaged ascending ranks rescaled to [0, 1]; a lone value is 1."""
    n = len(indicator)
    if n == 1:
        return {resource: Fraction(1) for resource in indicator}
    ordered = sorted(indicator, key=lambda r: (indicator[r], r))
    avg_rank: dict[str, Fraction] = {}
    i = 0
    while i < n:
        j = i
        while j < n and indicator[ordered[j]] == indicator[ordered[i]]:
            j += 1
        mean = Fraction(i + 1 + j, 2)  # mean of ranks i+1 .. j
        for k in range(i, j):
            avg_rank[ordered[k]] = mean
        i = j
    return {r: (avg_rank[r] - 1) / (n - 1) for r in indicator}


def derive_expertise(
    records,
    attribute: str,
    threshold,
    floor: int = 5,
) -> GraphUpdate:
    """`expertFor` edges for concentrated work on one attribute value.

    A resource is an expert for a value when its share of completed tasks on
    cases with that value reaches `threshold` and the supporting count
    reaches `floor`.
    """
    if attribute not in EXPERTISE_ATTRIBUTES:
        raise ValueError(
            f"attribute must be one of {EXPERTISE_ATTRIBUTES}, got {attribute!r}"
        )
    if not 0 < float(threshold) <= 1:
        raise ValueError("threshold must be in (0, 1]")
    totals: dict[str, int] = {}
    per_value: dict[tuple[str, str], int] = {}
    for r in records:
        value = r.application_type if attribute == "ApplicationType" else r.loan_goal
        totals[r.resource] = totals.get(r.resource, 0) + 1
        per_value[(r.resource, value)] = per_value.get((r.resource, value), 0) + 1
    additions = []
    for (resource, value), count in sorted(per_value.items()):
        if count < floor:
            continue
        if Fraction(count, totals[resource]) >= Fraction(str(threshold)):
            additions.append(Triple(ident(resource), EXPERT_FOR, ident(value)))
    return GraphUpdate(
        additions=additions,
        provenance=(
            f"mined {attribute} expertise at threshold {threshold} "
            f"(floor {floor}) from {len(records)} completed tasks"
        ),
    )


def derive_permissions(records) -> GraphUpdate:
    """`canBeExecutedBy` edges for every observed (activity, resource) pair."""
    pairs = sorted({(r.activity, r.resource) for r in records})
    additions = [
        Triple(ident(activity), CAN_BE_EXECUTED_BY, ident(resource))
        for activity, resource in pairs
    ]
    return GraphUpdate(
        additions=additions,
        provenance=f"mined permissions from {len(records)} completed tasks",
    )
