"""In-memory indexed triple store with atomic batch updates.

The store keeps set semantics over triples plus three per-position indexes
that are maintained in lockstep. Mutations must be serialized by the caller
(single-writer contract); `snapshot()` hands out an independent copy that is
safe to read from other threads.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .terms import Term, Triple, parse_triple_line

STATUS_PROPOSED = "proposed"
STATUS_ACCEPTED = "accepted"
STATUS_REJECTED = "rejected"
STATUS_APPLIED = "applied"

UPDATE_STATUSES = (STATUS_PROPOSED, STATUS_ACCEPTED, STATUS_REJECTED, STATUS_APPLIED)


class UpdateError(ValueError):
    """A graph update that cannot be constructed or applied."""


class UpdateNotAcceptedError(UpdateError):
    """Only accepted updates may be applied."""


class MissingRemovalError(UpdateError):
    """Strict mode: an update tried to remove a triple that is not present."""


@dataclass
class GraphUpdate:
    """A reviewable batch of triple additions and removals."""

    additions: list[Triple] = field(default_factory=list)
    removals: list[Triple] = field(default_factory=list)
    provenance: str = ""
    status: str = STATUS_PROPOSED

    def __post_init__(self):
        if self.status not in UPDATE_STATUSES:
            raise UpdateError(f"unknown update status {self.status!r}")
        overlap = set(self.additions) & set(self.removals)
        if overlap:
            sample = sorted(overlap, key=Triple.sort_key)[0]
            raise UpdateError(
                f"update adds and removes the same triple: {sample.line()}"
            )

    def accept(self):
        self._transition(STATUS_PROPOSED, STATUS_ACCEPTED)

    def reject(self):
        self._transition(STATUS_PROPOSED, STATUS_REJECTED)

    def _transition(self, expected: str, target: str):
        if self.status != expected:
            raise UpdateError(
                f"cannot move update from {self.status!r} to {target!r}"
            )
        self.status = target

    def is_empty(self) -> bool:
        return not self.additions and not self.removals


class Graph:
    """Set of triples indexed by subject, predicate, and object."""

    def __init__(self, triples: Iterable[Triple] = ()):
        self._triples: set[Triple] = set()
        self._by_subject: dict[Term, set[Triple]] = {}
        self._by_predicate: dict[Term, set[Triple]] = {}
        self._by_object: dict[Term, set[Triple]] = {}
        for t in triples:
            self.add(t)

    def __len__(self) -> int:
        return len(self._triples)

    def __contains__(self, t: Triple) -> bool:
        return t in self._triples

    def __iter__(self) -> Iterator[Triple]:
        return iter(self._triples)

    def add(self, t: Triple):
        """Insert a triple; idempotent under set semantics."""
        if t in self._triples:
            return
        self._triples.add(t)
        self._by_subject.setdefault(t.subject, set()).add(t)
        self._by_predicate.setdefault(t.predicate, set()).add(t)
        self._by_object.setdefault(t.object, set()).add(t)

    def discard(self, t: Triple):
        """Remove a triple if present."""
        if t not in self._triples:
            return
        self._triples.discard(t)
        for index, key in (
            (self._by_subject, t.subject),
            (self._by_predicate, t.predicate),
            (self._by_object, t.object),
        ):
            bucket = index[key]
            bucket.discard(t)
            if not bucket:
                del index[key]

    def lookup(
        self,
        subject: Term | None = None,
        predicate: Term | None = None,
        object: Term | None = None,
    ) -> set[Triple]:
        """All triples matching every bound position (None = wildcard)."""
        candidate_sets = []
        if subject is not None:
            candidate_sets.append(self._by_subject.get(subject, set()))
        if predicate is not None:
            candidate_sets.append(self._by_predicate.get(predicate, set()))
        if object is not None:
            candidate_sets.append(self._by_object.get(object, set()))
        if not candidate_sets:
            return set(self._triples)
        candidate_sets.sort(key=len)
        result = set(candidate_sets[0])
        for other in candidate_sets[1:]:
            result &= other
            if not result:
                break
        return result

    def subjects(self, predicate: Term, object: Term) -> set[Term]:
        return {t.subject for t in self.lookup(predicate=predicate, object=object)}

    def objects(self, subject: Term, predicate: Term) -> set[Term]:
        return {t.object for t in self.lookup(subject=subject, predicate=predicate)}

    def object(self, subject: Term, predicate: Term) -> Term | None:
        """Single object for a functional relation; None when absent."""
        found = self.objects(subject, predicate)
        if not found:
            return None
        return min(found, key=Term.sort_key)

    def apply(self, update: GraphUpdate, *, missing_removal: str = "warn") -> list[str]:
        """Atomically apply an accepted update; returns warning messages.

        Validation happens before any mutation, so a rejected update leaves
        the graph untouched.
        """
        if missing_removal not in ("warn", "reject"):
            raise ValueError("missing_removal must be 'warn' or 'reject'")
        if update.status != STATUS_ACCEPTED:
            raise UpdateNotAcceptedError(
                f"update has status {update.status!r}, expected 'accepted'"
            )
        warnings = []
        for t in update.removals:
            if t not in self._triples:
                message = f"removal of missing triple: {t.line()}"
                if missing_removal == "reject":
                    raise MissingRemovalError(message)
                warnings.append(message)
        for t in update.removals:
            self.discard(t)
        for t in update.additions:
            self.add(t)
        update.status = STATUS_APPLIED
        return warnings

    def snapshot(self) -> "Graph":
        """Independent copy; safe to hand to readers on other threads."""
        return Graph(self._triples)

    def sorted_triples(self) -> list[Triple]:
        return sorted(self._triples, key=Triple.sort_key)


def load_graph(source) -> Graph:
    """Load a graph from a file path or text stream (one triple per line)."""
    if isinstance(source, (str,)):
        with open(source, "r", encoding="utf-8") as handle:
            return load_graph(handle)
    graph = Graph()
    for line in source:
        t = parse_triple_line(line)
        if t is not None:
            graph.add(t)
    return graph


def loads_graph(text: str) -> Graph:
    return load_graph(io.StringIO(text))


def save_graph(graph: Graph, destination):
    """Write the canonical (sorted, comment-free) form of the graph."""
    if isinstance(destination, str):
        with open(destination, "w", encoding="utf-8") as handle:
            save_graph(graph, handle)
            return
    for t in graph.sorted_triples():
        destination.write(t.line())
        destination.write("\n")


def dumps_graph(graph: Graph) -> str:
    out = io.StringIO()
    save_graph(graph, out)
    return out.getvalue()
