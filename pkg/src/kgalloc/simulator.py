"""Discrete-event simulation of a loan-application desk.

The simulator stands in for a process engine: it generates cases, enables
tasks along the process model, requests allocation decisions (automatically
or by parking them for a human), executes tasks over drawn durations, and
mirrors every lifecycle step into the knowledge graph and an event log.
Given the same seed and automatic mode, runs are byte-identical.
"""

from __future__ import annotations

import csv
import heapq
import json
import random
from dataclasses import dataclass
from decimal import Decimal

from . import vocab
from .graph import Graph
from .ontology import Ontology
from .reasoner import (
    AllocationDecision,
    NoEligibleResourceError,
    decide_automatic,
    decide_human,
    rank,
)
from .rules import RuleSet
from .terms import Triple, boolean, decimal, ident, integer

ENABLED = "enabled"
PENDING = "pending-decision"
RUNNING = "running"
COMPLETED = "completed"

AUTOMATIC = "automatic"
HUMAN = "human"

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


class SimulationPausedError(RuntimeError):
    """step() called while the simulation is paused."""


class DecisionAlreadyTakenError(ValueError):
    """The pending decision was already resolved."""


class OneToOneViolationError(AssertionError):
    """A resource was about to hold two running tasks."""


@dataclass(frozen=True)
class DurationSpec:
    kind: str  # fixed | uniform
    low: int
    high: int

    def draw(self, rng: random.Random) -> int:
        if self.kind == "fixed":
            return self.low
        return rng.randint(self.low, self.high)


@dataclass(frozen=True)
class ActivitySpec:
    name: str
    duration: DurationSpec


class ProcessModel:
    """Activities with sequence and exclusive-branch transitions.

    Transitions map an activity to weighted successors; `None` is the end.
    """

    def __init__(self, activities: list[ActivitySpec], transitions: dict, start: str):
        self.activities = {a.name: a for a in activities}
        self.transitions = transitions
        self.start = start
        self._validate()

    def _validate(self):
        if self.start not in self.activities:
            raise ValueError(f"start activity {self.start!r} not declared")
        reaches_end = False
        seen = set()
        frontier = [self.start]
        while frontier:
            name = frontier.pop()
            if name in seen:
                continue
            seen.add(name)
            options = self.transitions.get(name, [(None, 1.0)])
            total = sum(p for _, p in options)
            if abs(total - 1.0) > 1e-9:
                raise ValueError(f"branch probabilities at {name!r} sum to {total}")
            for target, _ in options:
                if target is None:
                    reaches_end = True
                elif target not in self.activities:
                    raise ValueError(f"transition to unknown activity {target!r}")
                else:
                    frontier.append(target)
        unreachable = set(self.activities) - seen
        if unreachable:
            raise ValueError(f"unreachable activities: {sorted(unreachable)}")
        if not reaches_end:
            raise ValueError("no path from start to an end node")

    def next_activity(self, current: str, rng: random.Random) -> str | None:
        options = self.transitions.get(current, [(None, 1.0)])
        if len(options) == 1:
            return options[0][0]
        roll = rng.random()
        cumulative = 0.0
        for target, probability in options:
            cumulative += probability
            if roll < cumulative:
                return target
        return options[-1][0]

    def duration(self, activity: str) -> DurationSpec:
        return self.activities[activity].duration


@dataclass
class CaseInstance:
    case_id: str
    application_type: str
    loan_goal: str
    requested_amount: Decimal
    arrival: int


@dataclass
class TaskInstance:
    task_id: str
    case_id: str
    activity: str
    state: str = ENABLED
    resource: str | None = None
    enabled_at: int | None = None
    started_at: int | None = None
    ended_at: int | None = None


@dataclass(frozen=True)
class BootstrapTask:
    """A pre-enabled task injected at simulation start (mid-flight case)."""

    task_id: str
    case_id: str
    activity: str
    at: int = 0


@dataclass
class CaseGeneratorConfig:
    interarrival: DurationSpec
    start_at: int
    application_types: dict[str, float]
    loan_goals: dict[str, float]
    amount_min: Decimal
    amount_max: Decimal
    case_prefix: str = "case-"
    first_number: int = 1


def generate_cases(config: CaseGeneratorConfig, count: int, seed: int) -> list[CaseInstance]:
    """Deterministically draw case arrivals and attributes for a seed."""
    rng = random.Random(seed)
    at_names = sorted(config.application_types)
    at_weights = [config.application_types[n] for n in at_names]
    lg_names = sorted(config.loan_goals)
    lg_weights = [config.loan_goals[n] for n in lg_names]
    min_cents = int(config.amount_min * 100)
    max_cents = int(config.amount_max * 100)
    cases = []
    clock = config.start_at
    for i in range(count):
        cases.append(
            CaseInstance(
                case_id=f"{config.case_prefix}{config.first_number + i}",
                application_type=rng.choices(at_names, weights=at_weights)[0],
                loan_goal=rng.choices(lg_names, weights=lg_weights)[0],
                requested_amount=Decimal(rng.randint(min_cents, max_cents)) / 100,
                arrival=clock,
            )
        )
        clock += config.interarrival.draw(rng)
    return cases


@dataclass
class PendingDecision:
    decision_id: str
    task_id: str
    created_at: int


@dataclass
class RunSummary:
    clock: int
    cases_completed: int
    tasks_completed: int
    deadlocked_tasks: list[str]


class Simulation:
    """Single-threaded, seeded simulation over one graph.

    The simulation is the sole writer to the graph during a run; callers in
    other threads must serialize access (see the service layer).
    """

    def __init__(
        self,
        graph: Graph,
        ontology: Ontology,
        rules: RuleSet,
        model: ProcessModel,
        *,
        seed: int = 0,
        mode: str = AUTOMATIC,
        next_task_number: int = 1,
        task_prefix: str = "task-",
        prune_completed_cases_after: int | None = None,
    ):
        if mode not in (AUTOMATIC, HUMAN):
            raise ValueError(f"unknown mode {mode!r}")
        self.graph = graph
        self.ontology = ontology
        self.rules = rules
        self.model = model
        self.mode = mode
        self.paused = False
        self.clock = 0
        self.seed = seed
        self.rng = random.Random(seed)
        # History stays as per-task triples; aggregate execution counts are
        # kept alongside, and old cases' task triples can be pruned away
        # once more than this many cases have completed after them.
        self.prune_completed_cases_after = prune_completed_cases_after
        self._completed_case_order: list[str] = []
        self.tasks: dict[str, TaskInstance] = {}
        self.cases: dict[str, CaseInstance] = {}
        self.pending: dict[str, PendingDecision] = {}
        self.resolved_decisions: set[str] = set()
        self.starved: list[str] = []
        self.decisions: list[AllocationDecision] = []
        self.event_rows: list[tuple] = []
        self.cases_completed = 0
        self._events: list[tuple] = []
        self._seq = 0
        self._task_number = next_task_number
        self._task_prefix = task_prefix
        self._decision_number = 0

    # -- scheduling ------------------------------------------------------

    def schedule_case(self, case: CaseInstance):
        self.cases[case.case_id] = case
        self._push(case.arrival, "arrival", case.case_id)

    def schedule_bootstrap(self, bootstrap: BootstrapTask):
        self._push(
            bootstrap.at,
            "enable",
            (bootstrap.case_id, bootstrap.activity, bootstrap.task_id, None),
        )

    def _push(self, time: int, kind: str, payload):
        self._seq += 1
        heapq.heappush(self._events, (time, self._seq, kind, payload))

    def has_work(self) -> bool:
        return bool(self._events)

    def next_event_time(self) -> int | None:
        return self._events[0][0] if self._events else None

    # -- control ---------------------------------------------------------

    def pause(self):
        self.paused = True

    def resume(self):
        self.paused = False

    def set_mode(self, mode: str):
        if mode not in (AUTOMATIC, HUMAN):
            raise ValueError(f"unknown mode {mode!r}")
        self.mode = mode

    # -- stepping --------------------------------------------------------

    def step(self) -> bool:
        """Process the earliest event; False when the queue is empty."""
        if self.paused:
            raise SimulationPausedError("simulation is paused")
        if self.mode == AUTOMATIC and self.pending:
            # Drain parked decisions before the clock advances (mode was
            # switched back to automatic while decisions were pending).
            for decision_id in sorted(self.pending, key=_decision_order):
                self._auto_resolve(decision_id)
        if not self._events:
            return False
        time, _, kind, payload = heapq.heappop(self._events)
        self.clock = time
        if kind == "arrival":
            self._handle_arrival(payload)
        elif kind == "enable":
            self._handle_enable(payload)
        elif kind == "complete":
            self._handle_complete(payload)
        return True

    def run(
        self,
        until: int | None = None,
        decide=None,
        until_cases: int | None = None,
    ) -> RunSummary:
        """Run to quiescence, a clock limit, or a completed-case count.

        In human mode a `decide(sim, decision_id, task_id) -> resource_id`
        callback must be wired to resolve parked decisions.
        """
        if self.paused:
            raise SimulationPausedError("simulation is paused")
        if self.mode == HUMAN and decide is None:
            raise ValueError("human mode needs a decision callback")
        while True:
            self._drain_pending(decide)
            if until_cases is not None and self.cases_completed >= until_cases:
                break
            upcoming = self.next_event_time()
            if upcoming is None or (until is not None and upcoming > until):
                break
            self.step()
        self._drain_pending(decide)
        deadlocked = sorted(self.starved) if not self._events else []
        return RunSummary(
            clock=self.clock,
            cases_completed=self.cases_completed,
            tasks_completed=sum(
                1 for t in self.tasks.values() if t.state == COMPLETED
            ),
            deadlocked_tasks=deadlocked,
        )

    def _drain_pending(self, decide):
        while self.pending and decide is not None:
            decision_id = sorted(self.pending, key=_decision_order)[0]
            parked = self.pending[decision_id]
            selection = decide(self, decision_id, parked.task_id)
            self.submit_decision(decision_id, selection)

    # -- event handlers ---------------------------------------------------

    def _handle_arrival(self, case_id: str):
        case = self.cases[case_id]
        c = ident(case_id)
        self.graph.add(Triple(c, vocab.TYPE, vocab.CASE))
        self.graph.add(
            Triple(c, vocab.HAS_APPLICATION_TYPE, ident(case.application_type))
        )
        self.graph.add(Triple(c, vocab.HAS_LOAN_GOAL, ident(case.loan_goal)))
        self.graph.add(
            Triple(c, vocab.REQUESTED_AMOUNT, decimal(case.requested_amount))
        )
        self._enable(case_id, self.model.start, None, None)

    def _handle_enable(self, payload):
        case_id, activity, task_id, predecessor = payload
        self._enable(case_id, activity, task_id, predecessor)

    def _enable(self, case_id, activity, task_id, predecessor):
        if task_id is None:
            task_id = f"{self._task_prefix}{self._task_number}"
            self._task_number += 1
        task = TaskInstance(
            task_id=task_id,
            case_id=case_id,
            activity=activity,
            enabled_at=self.clock,
        )
        self.tasks[task_id] = task
        t = ident(task_id)
        self.graph.add(Triple(t, vocab.TYPE, vocab.TASK))
        self.graph.add(Triple(t, vocab.INSTANCE_OF, ident(activity)))
        self.graph.add(Triple(t, vocab.PART_OF, ident(case_id)))
        self.graph.add(Triple(t, vocab.ENABLED_AT, integer(self.clock)))
        if predecessor is not None:
            self.graph.add(
                Triple(ident(predecessor), vocab.DIRECTLY_FOLLOWED_BY, t)
            )
        self._emit(task, ENABLED)
        self._try_allocate(task)

    def _try_allocate(self, task: TaskInstance):
        if self.mode == AUTOMATIC:
            try:
                decision = decide_automatic(
                    task.task_id, self.graph, self.rules, self.ontology, self.clock
                )
            except NoEligibleResourceError:
                if task.task_id not in self.starved:
                    self.starved.append(task.task_id)
                return
            self._start(task, decision)
        else:
            try:
                rank(task.task_id, self.graph, self.rules, self.ontology)
            except NoEligibleResourceError:
                if task.task_id not in self.starved:
                    self.starved.append(task.task_id)
                return
            self._park(task)

    def _park(self, task: TaskInstance):
        self._decision_number += 1
        decision_id = f"d{self._decision_number}"
        self.pending[decision_id] = PendingDecision(
            decision_id=decision_id, task_id=task.task_id, created_at=self.clock
        )
        task.state = PENDING

    def _auto_resolve(self, decision_id: str):
        parked = self.pending[decision_id]
        task = self.tasks[parked.task_id]
        try:
            decision = decide_automatic(
                task.task_id, self.graph, self.rules, self.ontology, self.clock
            )
        except NoEligibleResourceError:
            del self.pending[decision_id]
            task.state = ENABLED
            if task.task_id not in self.starved:
                self.starved.append(task.task_id)
            return
        del self.pending[decision_id]
        self.resolved_decisions.add(decision_id)
        self._start(task, decision)

    def submit_decision(self, decision_id: str, resource_id: str) -> AllocationDecision:
        """Resolve a parked decision with a human selection."""
        if decision_id in self.resolved_decisions:
            raise DecisionAlreadyTakenError(f"decision {decision_id!r} already taken")
        if decision_id not in self.pending:
            raise KeyError(decision_id)
        parked = self.pending[decision_id]
        decision = decide_human(
            parked.task_id,
            self.graph,
            self.rules,
            self.ontology,
            resource_id,
            self.clock,
        )
        del self.pending[decision_id]
        self.resolved_decisions.add(decision_id)
        self._start(self.tasks[parked.task_id], decision)
        return decision

    def _start(self, task: TaskInstance, decision: AllocationDecision):
        resource = ident(decision.chosen)
        busy = Triple(resource, vocab.BUSY, boolean(True))
        if busy in self.graph:
            raise OneToOneViolationError(
                f"resource {decision.chosen!r} already holds a running task"
            )
        self.decisions.append(decision)
        task.state = RUNNING
        task.resource = decision.chosen
        task.started_at = self.clock
        self.graph.add(busy)
        self.graph.add(Triple(ident(task.task_id), vocab.STARTED_AT, integer(self.clock)))
        self._emit(task, "started")
        duration = self.model.duration(task.activity).draw(self.rng)
        self._push(self.clock + duration, "complete", task.task_id)

    def _handle_complete(self, task_id: str):
        task = self.tasks[task_id]
        task.state = COMPLETED
        task.ended_at = self.clock
        t = ident(task_id)
        resource = ident(task.resource)
        self.graph.discard(Triple(resource, vocab.BUSY, boolean(True)))
        self.graph.add(Triple(t, vocab.ENDED_AT, integer(self.clock)))
        self.graph.add(Triple(t, vocab.PERFORMED_BY, resource))
        self._bump_execution_stat(task.resource, task.activity)
        self._emit(task, COMPLETED)
        successor = self.model.next_activity(task.activity, self.rng)
        if successor is None:
            self.cases_completed += 1
            self._completed_case_order.append(task.case_id)
            self._prune_history()
        else:
            self._push(self.clock, "enable", (task.case_id, successor, None, task_id))
        # Freed capacity: retry tasks that previously found no resource.
        for starved_id in list(self.starved):
            starved_task = self.tasks[starved_id]
            self.starved.remove(starved_id)
            self._try_allocate(starved_task)

    def _bump_execution_stat(self, resource_id: str, activity: str):
        stat = ident(f"exec-{resource_id}-{activity}")
        count = self.graph.object(stat, vocab.STAT_COUNT)
        if count is None:
            self.graph.add(Triple(stat, vocab.TYPE, vocab.EXECUTION_STAT))
            self.graph.add(Triple(stat, vocab.STAT_OF, ident(resource_id)))
            self.graph.add(Triple(stat, vocab.STAT_ACTIVITY, ident(activity)))
            next_count = 1
        else:
            self.graph.discard(Triple(stat, vocab.STAT_COUNT, count))
            next_count = count.value + 1
        self.graph.add(Triple(stat, vocab.STAT_COUNT, integer(next_count)))

    def _prune_history(self):
        """Drop task triples of cases old enough that only aggregates matter."""
        if self.prune_completed_cases_after is None:
            return
        while len(self._completed_case_order) > self.prune_completed_cases_after:
            case_id = self._completed_case_order.pop(0)
            for task in self.tasks.values():
                if task.case_id != case_id or task.state != COMPLETED:
                    continue
                t = ident(task.task_id)
                for triple_ in list(self.graph.lookup(subject=t)):
                    self.graph.discard(triple_)
                for triple_ in list(self.graph.lookup(object=t)):
                    self.graph.discard(triple_)

    # -- output ----------------------------------------------------------

    def _emit(self, task: TaskInstance, lifecycle: str):
        case = self.cases.get(task.case_id)
        if case is not None:
            attrs = (case.application_type, case.loan_goal, str(case.requested_amount))
        else:
            attrs = self._case_attrs_from_graph(task.case_id)
        self.event_rows.append(
            (
                task.case_id,
                task.task_id,
                task.activity,
                task.resource or "",
                lifecycle,
                str(self.clock),
            )
            + attrs
        )

    def _case_attrs_from_graph(self, case_id: str) -> tuple[str, str, str]:
        c = ident(case_id)
        at = self.graph.object(c, vocab.HAS_APPLICATION_TYPE)
        lg = self.graph.object(c, vocab.HAS_LOAN_GOAL)
        amount = self.graph.object(c, vocab.REQUESTED_AMOUNT)
        return (
            at.value if at is not None else "",
            lg.value if lg is not None else "",
            amount.plain() if amount is not None else "",
        )

    def counts(self) -> dict[str, int]:
        states = {ENABLED: 0, PENDING: 0, RUNNING: 0, COMPLETED: 0}
        for task in self.tasks.values():
            states[task.state] += 1
        return {
            "cases": len(self.cases),
            "cases_completed": self.cases_completed,
            "tasks_enabled": len(self.tasks),
            "tasks_running": states[RUNNING],
            "tasks_completed": states[COMPLETED],
            "pending_decisions": len(self.pending),
            "starved_tasks": len(self.starved),
        }

    def check_one_to_one(self) -> bool:
        """No resource holds more than one running task right now."""
        holders = [t.resource for t in self.tasks.values() if t.state == RUNNING]
        return len(holders) == len(set(holders))

    def check_conservation(self) -> bool:
        """Each task is in exactly one state; lingering enabled ones are starved."""
        states = {ENABLED: 0, PENDING: 0, RUNNING: 0, COMPLETED: 0}
        for task in self.tasks.values():
            states[task.state] += 1
        enabled = {t.task_id for t in self.tasks.values() if t.state == ENABLED}
        return sum(states.values()) == len(self.tasks) and enabled == set(self.starved)

    def write_event_log(self, destination):
        if isinstance(destination, str):
            with open(destination, "w", encoding="utf-8", newline="") as handle:
                self.write_event_log(handle)
                return
        writer = csv.writer(destination)
        writer.writerow(LOG_COLUMNS)
        writer.writerows(self.event_rows)


def _decision_order(decision_id: str) -> int:
    try:
        return int(decision_id.lstrip("d"))
    except ValueError:
        return 0


def decision_record(decision: AllocationDecision) -> dict:
    """Structured journal form of one allocation decision."""
    return {
        "task": decision.task_id,
        "case": decision.case_id,
        "activity": decision.activity,
        "chosen": decision.chosen,
        "mode": decision.mode,
        "divergence": decision.divergence,
        "timestamp": decision.timestamp,
        "available": decision.available,
        "candidates": [
            {
                "resource": a.resource_id,
                "score": float(a.score),
                "eligible": a.eligible,
                "findings": [
                    {"rule": f.rule_id, "score": float(f.score), "message": f.message}
                    for f in a.findings
                ],
                "violations": [
                    {"rule": f.rule_id, "message": f.message}
                    for f in a.hard_violations
                ],
            }
            for a in decision.candidates
        ],
        "explanation": decision.explanation,
    }


def write_decision_journal(decisions, destination):
    if isinstance(destination, str):
        with open(destination, "w", encoding="utf-8") as handle:
            write_decision_journal(decisions, handle)
            return
    for decision in decisions:
        destination.write(json.dumps(decision_record(decision), sort_keys=True))
        destination.write("\n")


def write_explanation_log(decisions, destination):
    if isinstance(destination, str):
        with open(destination, "w", encoding="utf-8") as handle:
            write_explanation_log(decisions, handle)
            return
    for decision in decisions:
        destination.write(decision.explanation)
        destination.write("\n\n")
