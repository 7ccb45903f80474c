"""Human-in-the-loop review of graph updates.

Every change to the knowledge graph travels as a proposal: the update is
rendered into one human-readable line per triple (phrased through the
ontology's relation descriptions), reviewed, and only then applied. All
transitions append to a journal file so reviews survive restarts.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .graph import (
    STATUS_ACCEPTED,
    STATUS_APPLIED,
    STATUS_PROPOSED,
    STATUS_REJECTED,
    Graph,
    GraphUpdate,
)
from .ontology import Ontology
from .terms import Term, Triple, parse_token

STATUS_SUPERSEDED = "superseded"

ACCEPT = "accept"
REJECT = "reject"
AMEND = "amend"


class InvalidTransitionError(ValueError):
    """A review action that the proposal's status does not allow."""


@dataclass
class UpdateProposal:
    id: str
    update: GraphUpdate
    rendering: list[str]
    status: str = STATUS_PROPOSED
    supersedes: str | None = None
    superseded_by: str | None = None


def render_triple(t: Triple, ontology: Ontology, context: GraphUpdate | None = None) -> str:
    """One sentence for a triple, phrased via ontology descriptions."""
    subject = _display(t.subject, context)
    obj = _display(t.object, context)
    if t.object.kind in ("id", "str"):
        obj = f"'{obj}'"
    name = t.predicate.value
    if name == "type":
        return f"'{subject}' is a {t.object.value}"
    if name == "label":
        return f"'{subject}' is labeled {obj}"
    rel = ontology.relations.get(name)
    if rel is None:
        return f"'{subject}' {name} {obj} (undeclared relation)"
    phrase = rel.description or name
    subject_class = _class_of(t.subject, ontology, context, rel.domain)
    noun = f"{subject_class.lower()} " if subject_class else ""
    return f"{noun}'{subject}' {phrase} {obj}"


def _display(term: Term, context: GraphUpdate | None) -> str:
    if term.is_identifier and context is not None:
        for t in context.additions:
            if (
                t.subject == term
                and t.predicate.value == "label"
                and t.object.kind == "str"
            ):
                return str(t.object.value)
    if term.kind == "str":
        return str(term.value)
    return term.plain()


def _class_of(subject: Term, ontology: Ontology, context, fallback: str) -> str:
    if context is not None:
        for t in context.additions:
            if t.subject == subject and t.predicate.value == "type":
                return str(t.object.value)
    return fallback


def propose_update(update: GraphUpdate, ontology: Ontology) -> UpdateProposal:
    """Render an update for review; the proposal starts out `proposed`."""
    rendering = [
        f"Add: {render_triple(t, ontology, update)}" for t in update.additions
    ] + [f"Remove: {render_triple(t, ontology, update)}" for t in update.removals]
    return UpdateProposal(id="", update=update, rendering=rendering)


def review_update(
    proposal: UpdateProposal,
    verdict: str,
    new_update: GraphUpdate | None = None,
    ontology: Ontology | None = None,
) -> UpdateProposal:
    """Accept, reject, or amend a proposal.

    Amending creates a fresh superseding proposal (whole-update replacement)
    and returns it; the old one is marked superseded. Accept and reject
    return the same proposal with its new status.
    """
    if proposal.status != STATUS_PROPOSED:
        raise InvalidTransitionError(
            f"proposal {proposal.id!r} is {proposal.status!r}, not reviewable"
        )
    if verdict == ACCEPT:
        proposal.update.accept()
        proposal.status = STATUS_ACCEPTED
        return proposal
    if verdict == REJECT:
        proposal.update.reject()
        proposal.status = STATUS_REJECTED
        return proposal
    if verdict == AMEND:
        if new_update is None or ontology is None:
            raise ValueError("amend needs a replacement update and the ontology")
        replacement = propose_update(new_update, ontology)
        replacement.supersedes = proposal.id
        proposal.status = STATUS_SUPERSEDED
        return replacement
    raise ValueError(f"unknown verdict {verdict!r}")


def _triple_wire(t: Triple) -> list[str]:
    return [t.subject.token(), t.predicate.token(), t.object.token()]


def _triple_from_wire(parts) -> Triple:
    return Triple(parse_token(parts[0]), parse_token(parts[1]), parse_token(parts[2]))


class ProposalLog:
    """Append-only journal of proposals and their review transitions."""

    def __init__(self, path: str | None = None):
        self.path = path
        self.proposals: dict[str, UpdateProposal] = {}
        self._order: list[str] = []
        self._counter = 0
        if path is not None:
            self._replay(path)

    def __iter__(self):
        return (self.proposals[pid] for pid in self._order)

    def __len__(self):
        return len(self._order)

    def get(self, proposal_id: str) -> UpdateProposal | None:
        return self.proposals.get(proposal_id)

    def propose(self, update: GraphUpdate, ontology: Ontology) -> UpdateProposal:
        proposal = propose_update(update, ontology)
        proposal.id = self._next_id()
        self._register(proposal)
        self._append(
            {
                "event": "proposed",
                "proposal": proposal.id,
                "supersedes": proposal.supersedes,
                "update": _update_wire(update),
                "rendering": proposal.rendering,
            }
        )
        return proposal

    def review(
        self,
        proposal_id: str,
        verdict: str,
        new_update: GraphUpdate | None = None,
        ontology: Ontology | None = None,
    ) -> UpdateProposal:
        proposal = self.proposals[proposal_id]
        result = review_update(proposal, verdict, new_update, ontology)
        if verdict == AMEND:
            result.id = self._next_id()
            proposal.superseded_by = result.id
            self._register(result)
            self._append(
                {
                    "event": "amended",
                    "proposal": proposal_id,
                    "replacement": result.id,
                    "update": _update_wire(result.update),
                    "rendering": result.rendering,
                }
            )
        else:
            self._append({"event": verdict + "ed", "proposal": proposal_id})
        return result

    def apply(self, proposal_id: str, graph: Graph, **apply_kwargs) -> list[str]:
        """Apply an accepted proposal's update to the graph."""
        proposal = self.proposals[proposal_id]
        warnings = graph.apply(proposal.update, **apply_kwargs)
        proposal.status = STATUS_APPLIED
        self._append({"event": "applied", "proposal": proposal_id})
        return warnings

    def _next_id(self) -> str:
        self._counter += 1
        return f"p{self._counter}"

    def _register(self, proposal: UpdateProposal):
        self.proposals[proposal.id] = proposal
        self._order.append(proposal.id)

    def _append(self, record: dict):
        if self.path is None:
            return
        with open(self.path, "a", encoding="utf-8") as handle:
            handle.write(json.dumps(record, sort_keys=True) + "\n")

    def _replay(self, path: str):
        try:
            handle = open(path, "r", encoding="utf-8")
        except FileNotFoundError:
            return
        with handle:
            for line in handle:
                line = line.strip()
                if not line:
                    continue
                record = json.loads(line)
                self._apply_record(record)

    def _apply_record(self, record: dict):
        event = record["event"]
        if event == "proposed":
            update = _update_from_wire(record["update"])
            proposal = UpdateProposal(
                id=record["proposal"],
                update=update,
                rendering=list(record["rendering"]),
                supersedes=record.get("supersedes"),
            )
            self._register(proposal)
            self._counter = max(self._counter, _number(proposal.id))
        elif event == "amended":
            old = self.proposals[record["proposal"]]
            old.status = STATUS_SUPERSEDED
            old.superseded_by = record["replacement"]
            update = _update_from_wire(record["update"])
            proposal = UpdateProposal(
                id=record["replacement"],
                update=update,
                rendering=list(record["rendering"]),
                supersedes=record["proposal"],
            )
            self._register(proposal)
            self._counter = max(self._counter, _number(proposal.id))
        elif event == "accepted":
            proposal = self.proposals[record["proposal"]]
            proposal.update.accept()
            proposal.status = STATUS_ACCEPTED
        elif event == "rejected":
            proposal = self.proposals[record["proposal"]]
            proposal.update.reject()
            proposal.status = STATUS_REJECTED
        elif event == "applied":
            proposal = self.proposals[record["proposal"]]
            proposal.update.status = STATUS_APPLIED
            proposal.status = STATUS_APPLIED


def _number(proposal_id: str) -> int:
    try:
        return int(proposal_id.lstrip("p"))
    except ValueError:
        return 0


def _update_wire(update: GraphUpdate) -> dict:
    return {
        "additions": [_triple_wire(t) for t in update.additions],
        "removals": [_triple_wire(t) for t in update.removals],
        "provenance": update.provenance,
    }


def _update_from_wire(wire: dict) -> GraphUpdate:
    return GraphUpdate(
        additions=[_triple_from_wire(p) for p in wire.get("additions", [])],
        removals=[_triple_from_wire(p) for p in wire.get("removals", [])],
        provenance=wire.get("provenance", ""),
    )
