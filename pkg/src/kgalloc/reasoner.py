"""Assessment and ranking of candidate task-to-resource assignments.

For an enabled task the reasoner enumerates permitted resources, asserts
each candidate assignment as a transient `performedBy` triple, evaluates
every rule against it, and aggregates the matches into a scored, explained
assessment. Hard-rule matches disqualify; soft-rule matches sum.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import Decimal

from . import vocab
from .graph import Graph
from .ontology import Ontology
from .rules import HARD, RuleSet, display_term, evaluate
from .terms import Term, Triple, boolean, ident


class UnknownTaskError(KeyError):
    """The task id has no `instanceOf` edge in the graph."""


class NoEligibleResourceError(RuntimeError):
    """No candidate survives permissions, busyness, and hard rules."""

    def __init__(self, task_id: str, assessments: list["Assessment"]):
        super().__init__(f"no eligible resource for task {task_id!r}")
        self.task_id = task_id
        self.assessments = assessments


class IneligibleSelectionError(ValueError):
    """A human selection that hard constraints rule out."""

    def __init__(self, task_id: str, resource_id: str, messages: list[str]):
        detail = "; ".join(messages) if messages else "not an available resource"
        super().__init__(
            f"resource {resource_id!r} is not eligible for task {task_id!r}: {detail}"
        )
        self.task_id = task_id
        self.resource_id = resource_id
        self.messages = messages


@dataclass(frozen=True)
class Finding:
    """One rule match explained: its rule, score contribution, and message."""

    rule_id: str
    score: Decimal
    message: str


@dataclass
class Assessment:
    task_id: str
    resource_id: str
    findings: list[Finding] = field(default_factory=list)
    hard_violations: list[Finding] = field(default_factory=list)

    @property
    def eligible(self) -> bool:
        return not self.hard_violations

    @property
    def score(self) -> Decimal:
        return sum((f.score for f in self.findings), Decimal("0"))


@dataclass
class AllocationDecision:
    task_id: str
    case_id: str
    activity: str
    activity_label: str
    chosen: str
    mode: str  # automatic | human
    candidates: list[Assessment]
    available: list[str]
    timestamp: int
    divergence: bool
    explanation: str


def eligible_resources(task_id: str, graph: Graph) -> set[str]:
    """Permitted, non-busy resources for the task's activity.

    Permission is a `canBeExecutedBy` edge from the activity, either straight
    to a resource or to a role that resources hold via `hasRole`. One-to-one
    allocation: resources flagged busy are excluded.
    """
    task = ident(task_id)
    activity = graph.object(task, vocab.INSTANCE_OF)
    if activity is None:
        raise UnknownTaskError(task_id)
    candidates: set[Term] = set()
    for target in graph.objects(activity, vocab.CAN_BE_EXECUTED_BY):
        if not target.is_identifier:
            continue
        if Triple(target, vocab.TYPE, vocab.RESOURCE) in graph:
            candidates.add(target)
        candidates |= graph.subjects(vocab.HAS_ROLE, target)
    busy = boolean(True)
    return {
        c.value
        for c in candidates
        if Triple(c, vocab.BUSY, busy) not in graph
    }


def assess(
    task_id: str,
    resource_id: str,
    graph: Graph,
    rules: RuleSet,
    ontology: Ontology,
) -> Assessment:
    """Evaluate every rule against the hypothetical assignment.

    The candidate `performedBy` triple is transient: it is removed again
    even if evaluation fails, so the graph is never left changed.
    """
    task, resource = ident(task_id), ident(resource_id)
    hypothesis = Triple(task, vocab.PERFORMED_BY, resource)
    added = hypothesis not in graph
    if added:
        graph.add(hypothesis)
    try:
        assessment = Assessment(task_id=task_id, resource_id=resource_id)
        for rule in rules:
            seed = {rule.task_var: task, rule.resource_var: resource}
            for match in evaluate(rule, graph, seed, ontology.scales):
                finding = Finding(rule.id, rule.signed_score, match.message)
                if rule.severity == HARD:
                    assessment.hard_violations.append(finding)
                else:
                    assessment.findings.append(finding)
        return assessment
    finally:
        if added:
            graph.discard(hypothesis)


def rank(
    task_id: str,
    graph: Graph,
    rules: RuleSet,
    ontology: Ontology,
) -> list[Assessment]:
    """All candidate assessments: eligible ones ranked first.

    Eligible candidates sort by score descending (ties by resource id);
    hard-violating ones keep their explanations and trail the list. Raises
    NoEligibleResourceError (carrying the assessments) when nothing ranks.
    """
    assessments = [
        assess(task_id, resource_id, graph, rules, ontology)
        for resource_id in sorted(eligible_resources(task_id, graph))
    ]
    ranked = [a for a in assessments if a.eligible]
    blocked = [a for a in assessments if not a.eligible]
    key = lambda a: (-a.score, a.resource_id)  # noqa: E731
    ranked.sort(key=key)
    blocked.sort(key=key)
    if not ranked:
        raise NoEligibleResourceError(task_id, blocked)
    return ranked + blocked


def decide_automatic(
    task_id: str,
    graph: Graph,
    rules: RuleSet,
    ontology: Ontology,
    timestamp: int = 0,
) -> AllocationDecision:
    """Pick the top-ranked candidate and build its explanation block."""
    candidates = rank(task_id, graph, rules, ontology)
    chosen = candidates[0]
    return _decision(task_id, chosen, candidates, graph, "automatic", False, timestamp)


def decide_human(
    task_id: str,
    graph: Graph,
    rules: RuleSet,
    ontology: Ontology,
    selection: str,
    timestamp: int = 0,
) -> AllocationDecision:
    """Record a human selection; hard constraints are not overridable."""
    try:
        candidates = rank(task_id, graph, rules, ontology)
    except NoEligibleResourceError as exc:
        # Even with nothing rankable, the caller asked about one resource:
        # answer with that selection's own violations.
        candidates = exc.assessments
    by_resource = {a.resource_id: a for a in candidates}
    picked = by_resource.get(selection)
    if picked is None:
        raise IneligibleSelectionError(task_id, selection, [])
    if not picked.eligible:
        raise IneligibleSelectionError(
            task_id, selection, [f.message for f in picked.hard_violations]
        )
    divergence = selection != candidates[0].resource_id
    return _decision(task_id, picked, candidates, graph, "human", divergence, timestamp)


def _decision(task_id, chosen, candidates, graph, mode, divergence, timestamp):
    task = ident(task_id)
    case = graph.object(task, vocab.PART_OF)
    activity = graph.object(task, vocab.INSTANCE_OF)
    case_id = case.value if case is not None else ""
    activity_id = activity.value if activity is not None else ""
    activity_label = display_term(activity, graph) if activity is not None else ""
    available = sorted(a.resource_id for a in candidates)
    decision = AllocationDecision(
        task_id=task_id,
        case_id=case_id,
        activity=activity_id,
        activity_label=activity_label,
        chosen=chosen.resource_id,
        mode=mode,
        candidates=candidates,
        available=available,
        timestamp=timestamp,
        divergence=divergence,
        explanation="",
    )
    decision.explanation = explanation_block(decision)
    return decision


def explanation_block(decision: AllocationDecision) -> str:
    """Human-readable justification for one decision.

    Layout: header line, the available set (canonicalized lexicographically),
    the assignment line, then one indented line per finding of the chosen
    candidate.
    """
    chosen = next(
        a for a in decision.candidates if a.resource_id == decision.chosen
    )
    listed = ", ".join(f"'{r}'" for r in decision.available)
    lines = [
        f"{decision.case_id} {decision.task_id}: {decision.activity_label}",
        f"Resources Available: {{{listed}}}",
        f"Assigning: {decision.chosen} to {decision.task_id} considering the following:",
    ]
    lines.extend(f"    {finding.message}" for finding in chosen.findings)
    return "\n".join(lines)
