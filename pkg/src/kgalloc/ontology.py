"""Concept-level knowledge: classes, relations, and ordered scales.

The ontology is a sidecar to the instance graph. It declares which classes
and relations exist, constrains relation endpoints (domain/range), and holds
ordered scales such as seniority ranks. `validate` checks an instance graph
against these declarations.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

from .graph import Graph
from .terms import BOOL, DEC, INT, STR, Term, Triple, ident

LITERAL_RANGE_KINDS = (STR, INT, DEC, BOOL)

# Predicates with built-in meaning; always legal, never flagged as undeclared.
BUILTIN_PREDICATES = frozenset({"type", "label"})

TYPE = ident("type")
LABEL = ident("label")


class OntologyError(ValueError):
    """An ill-formed ontology declaration or document."""


class NotOnScaleError(ValueError):
    """A term compared against a scale it is not a level of."""


@dataclass(frozen=True)
class ClassDef:
    name: str
    description: str = ""
    parent: str | None = None


@dataclass(frozen=True)
class RelationDef:
    name: str
    description: str = ""
    domain: str = ""
    range: str = ""
    functional: bool = False


@dataclass(frozen=True)
class OrderedScale:
    name: str
    levels: tuple[Term, ...]

    def __post_init__(self):
        if len(set(self.levels)) != len(self.levels):
            raise OntologyError(f"scale {self.name!r} has duplicate levels")
        if not all(level.is_identifier for level in self.levels):
            raise OntologyError(f"scale {self.name!r} levels must be identifiers")

    def rank(self, term: Term) -> int:
        for i, level in enumerate(self.levels):
            if level == term:
                return i
        raise NotOnScaleError(f"{term!r} is not a level of scale {self.name!r}")

    def __contains__(self, term: Term) -> bool:
        return term in self.levels


def compare_scale(scale: OrderedScale, a: Term, b: Term) -> int:
    """Ordering of rank(a) vs rank(b): -1 below, 0 equal, +1 above."""
    ra, rb = scale.rank(a), scale.rank(b)
    return (ra > rb) - (ra < rb)


class Ontology:
    def __init__(self):
        self.classes: dict[str, ClassDef] = {}
        self.relations: dict[str, RelationDef] = {}
        self.scales: dict[str, OrderedScale] = {}

    def add_class(self, cls: ClassDef):
        if cls.name in self.classes:
            raise OntologyError(f"class {cls.name!r} declared twice")
        self.classes[cls.name] = cls
        if cls.parent is not None:
            self._check_parent_cycle(cls.name)

    def add_relation(self, rel: RelationDef):
        if rel.name in self.relations:
            raise OntologyError(f"relation {rel.name!r} declared twice")
        self.relations[rel.name] = rel

    def add_scale(self, scale: OrderedScale):
        if scale.name in self.scales:
            raise OntologyError(f"scale {scale.name!r} declared twice")
        self.scales[scale.name] = scale

    def _check_parent_cycle(self, start: str):
        seen = {start}
        current = self.classes[start].parent
        while current is not None:
            if current in seen:
                raise OntologyError(f"class parent cycle through {start!r}")
            seen.add(current)
            cls = self.classes.get(current)
            current = cls.parent if cls else None

    def ancestors(self, class_name: str) -> set[str]:
        """The class and all its parents (computed on demand, never stored)."""
        result = set()
        current: str | None = class_name
        while current is not None and current not in result:
            result.add(current)
            cls = self.classes.get(current)
            current = cls.parent if cls else None
        return result

    def check(self):
        """Validate cross-references after all declarations are in."""
        for cls in self.classes.values():
            if cls.parent is not None and cls.parent not in self.classes:
                raise OntologyError(
                    f"class {cls.name!r} names unknown parent {cls.parent!r}"
                )
        for rel in self.relations.values():
            if rel.domain not in self.classes:
                raise OntologyError(
                    f"relation {rel.name!r} names unknown domain {rel.domain!r}"
                )
            if rel.range not in self.classes and rel.range not in LITERAL_RANGE_KINDS:
                raise OntologyError(
                    f"relation {rel.name!r} names unknown range {rel.range!r}"
                )


@dataclass(frozen=True)
class Violation:
    triple: Triple
    reason: str


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def validate(graph: Graph, ontology: Ontology) -> ValidationReport:
    """Check instance triples against relation domain/range and arity.

    Undeclared predicates are open-world: reported once each as warnings.
    Untyped endpoints are not violations; only contradictions are.
    """
    report = ValidationReport()
    undeclared: set[str] = set()
    functional_groups: dict[tuple[Term, Term], list[Triple]] = {}

    for t in sorted(graph, key=Triple.sort_key):
        name = t.predicate.value
        if name in BUILTIN_PREDICATES:
            continue
        rel = ontology.relations.get(name)
        if rel is None:
            undeclared.add(name)  # type: ignore[arg-type]
            continue
        _check_domain(graph, ontology, t, rel, report)
        _check_range(graph, ontology, t, rel, report)
        if rel.functional:
            functional_groups.setdefault((t.subject, t.predicate), []).append(t)

    for (subject, predicate), group in sorted(
        functional_groups.items(), key=lambda kv: (kv[0][0].sort_key(), kv[0][1].sort_key())
    ):
        if len(group) > 1:
            report.violations.append(
                Violation(
                    group[0],
                    f"functional relation {predicate.value!r} has {len(group)} "
                    f"values for {subject.value!r}",
                )
            )

    for name in sorted(undeclared):
        report.warnings.append(f"undeclared predicate {name!r}")
    return report


def _types_of(graph: Graph, node: Term) -> set[str]:
    return {
        t.object.value  # type: ignore[misc]
        for t in graph.lookup(subject=node, predicate=TYPE)
        if t.object.is_identifier
    }


def _conforms(ontology: Ontology, node_types: set[str], target: str) -> bool:
    return any(target in ontology.ancestors(n) for n in node_types)


def _check_domain(graph, ontology, t, rel, report):
    subject_types = _types_of(graph, t.subject)
    if subject_types and not _conforms(ontology, subject_types, rel.domain):
        report.violations.append(
            Violation(
                t,
                f"domain of {rel.name!r} is {rel.domain!r} but subject "
                f"{t.subject.value!r} has types {sorted(subject_types)}",
            )
        )


def _check_range(graph, ontology, t, rel, report):
    if rel.range in LITERAL_RANGE_KINDS:
        if t.object.kind != rel.range:
            report.violations.append(
                Violation(
                    t,
                    f"range of {rel.name!r} is a {rel.range} literal but object "
                    f"is {t.object.kind}",
                )
            )
        return
    if t.object.is_literal:
        report.violations.append(
            Violation(
                t,
                f"range of {rel.name!r} is class {rel.range!r} but object is a "
                f"{t.object.kind} literal",
            )
        )
        return
    object_types = _types_of(graph, t.object)
    if object_types and not _conforms(ontology, object_types, rel.range):
        report.violations.append(
            Violation(
                t,
                f"range of {rel.name!r} is {rel.range!r} but object "
                f"{t.object.value!r} has types {sorted(object_types)}",
            )
        )


_SECTION_KEYS = {
    "class": {"description", "parent"},
    "relation": {"description", "domain", "range", "functional"},
    "scale": {"levels"},
}


def parse_ontology(source) -> Ontology:
    """Parse an ontology document of class/relation/scale stanzas."""
    if isinstance(source, str):
        return _parse_ontology_lines(source.splitlines())
    return _parse_ontology_lines(source.read().splitlines())


def load_ontology(path: str) -> Ontology:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_ontology(handle)


def _parse_ontology_lines(lines) -> Ontology:
    ontology = Ontology()
    header: tuple[str, str] | None = None
    fields: dict[str, str] = {}

    def flush():
        nonlocal header, fields
        if header is None:
            return
        kind, name = header
        if kind == "class":
            ontology.add_class(
                ClassDef(
                    name=name,
                    description=fields.get("description", ""),
                    parent=fields.get("parent"),
                )
            )
        elif kind == "relation":
            if "domain" not in fields or "range" not in fields:
                raise OntologyError(f"relation {name!r} needs domain and range")
            ontology.add_relation(
                RelationDef(
                    name=name,
                    description=fields.get("description", ""),
                    domain=fields["domain"],
                    range=fields["range"],
                    functional=_parse_bool(fields.get("functional", "false"), name),
                )
            )
        else:
            levels = tuple(ident(token) for token in fields.get("levels", "").split())
            if not levels:
                raise OntologyError(f"scale {name!r} declares no levels")
            ontology.add_scale(OrderedScale(name=name, levels=levels))
        header = None
        fields = {}

    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        stripped = line.strip()
        first, _, rest = stripped.partition(" ")
        if first in _SECTION_KEYS and ":" not in first and rest and ":" not in rest:
            flush()
            header = (first, rest.strip())
            continue
        if header is None:
            raise OntologyError(f"line {lineno}: expected a stanza header: {stripped!r}")
        key, sep, value = stripped.partition(":")
        key = key.strip()
        if not sep or key not in _SECTION_KEYS[header[0]]:
            raise OntologyError(
                f"line {lineno}: unknown field {key!r} in {header[0]} stanza"
            )
        fields[key] = value.strip()
    flush()
    ontology.check()
    return ontology


def _parse_bool(text: str, name: str) -> bool:
    if text.lower() in ("true", "yes"):
        return True
    if text.lower() in ("false", "no"):
        return False
    raise OntologyError(f"relation {name!r}: bad boolean {text!r}")


def dumps_ontology(ontology: Ontology) -> str:
    """Render an ontology back into document form (canonical order)."""
    out = io.StringIO()
    for cls in sorted(ontology.classes.values(), key=lambda c: c.name):
        out.write(f"class {cls.name}\n")
        if cls.description:
            out.write(f"  description: {cls.description}\n")
        if cls.parent:
            out.write(f"  parent: {cls.parent}\n")
        out.write("\n")
    for rel in sorted(ontology.relations.values(), key=lambda r: r.name):
        out.write(f"relation {rel.name}\n")
        if rel.description:
            out.write(f"  description: {rel.description}\n")
        out.write(f"  domain: {rel.domain}\n")
        out.write(f"  range: {rel.range}\n")
        if rel.functional:
            out.write("  functional: true\n")
        out.write("\n")
    for scale in sorted(ontology.scales.values(), key=lambda s: s.name):
        out.write(f"scale {scale.name}\n")
        out.write("  levels: " + " ".join(level.value for level in scale.levels) + "\n")
        out.write("\n")
    return out.getvalue()
