"""Declarative allocation rules: graph patterns with filters and messages.

A rule is a conjunctive graph pattern over variables plus builtin filters,
a polarity (does a match speak for or against the assignment), a severity
(hard matches disqualify, soft matches score), and a message template that
turns each match into a human-readable finding.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from typing import Iterable, Mapping, Union

from .graph import Graph
from .ontology import LABEL, Ontology, OrderedScale
from .terms import DEC, INT, MalformedTermError, Term, parse_token, tokenize_line

POSITIVE = "positive"
NEGATIVE = "negative"
HARD = "hard"
SOFT = "soft"

FILTER_OPS = ("scaleGreaterEq", "scaleLess", "eq", "neq", "numGreaterEq", "numLess")
_SCALE_OPS = ("scaleGreaterEq", "scaleLess")
_NUM_OPS = ("numGreaterEq", "numLess")


class RuleError(ValueError):
    """An ill-formed rule (programmatic construction)."""


class RuleParseError(RuleError):
    """A rule document that does not parse; carries line and column."""

    def __init__(self, message: str, line: int, col: int = 1):
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col


class UnknownScaleError(RuleParseError):
    pass


class UnboundFocusVariableError(RuleParseError):
    pass


class UnboundPlaceholderError(KeyError):
    """A message placeholder with no bound value."""


@dataclass(frozen=True)
class Variable:
    name: str

    def __repr__(self):
        return f"?{self.name}"


PatternTerm = Union[Variable, Term]


@dataclass(frozen=True)
class PatternAtom:
    subject: PatternTerm
    predicate: Term  # constant; no predicate variables
    object: PatternTerm

    def variables(self) -> set[Variable]:
        return {p for p in (self.subject, self.object) if isinstance(p, Variable)}


@dataclass(frozen=True)
class Filter:
    op: str
    left: Variable
    right: PatternTerm
    scale: str | None = None

    def variables(self) -> set[Variable]:
        out = {self.left}
        if isinstance(self.right, Variable):
            out.add(self.right)
        return out


_PLACEHOLDER = re.compile(r"\{([A-Za-z_][A-Za-z0-9_]*)\}")


@dataclass
class Rule:
    id: str
    task_var: Variable
    resource_var: Variable
    atoms: list[PatternAtom]
    filters: list[Filter] = field(default_factory=list)
    polarity: str = POSITIVE
    severity: str = SOFT
    score: Decimal = Decimal("0")
    message: str = ""

    def __post_init__(self):
        if self.polarity not in (POSITIVE, NEGATIVE):
            raise RuleError(f"rule {self.id!r}: bad polarity {self.polarity!r}")
        if self.severity not in (HARD, SOFT):
            raise RuleError(f"rule {self.id!r}: bad severity {self.severity!r}")
        if self.severity == HARD and self.polarity != NEGATIVE:
            raise RuleError(
                f"rule {self.id!r}: hard rules must have negative polarity"
            )
        atom_vars = self.pattern_variables()
        for role, var in (("task-var", self.task_var), ("resource-var", self.resource_var)):
            if var not in atom_vars:
                raise RuleError(
                    f"rule {self.id!r}: {role} ?{var.name} does not occur in the pattern"
                )
        for f in self.filters:
            if f.op not in FILTER_OPS:
                raise RuleError(f"rule {self.id!r}: unknown filter op {f.op!r}")
            loose = f.variables() - atom_vars
            if loose:
                names = ", ".join(sorted("?" + v.name for v in loose))
                raise RuleError(
                    f"rule {self.id!r}: filter variable {names} not bound by the pattern"
                )
        for name in _PLACEHOLDER.findall(self.message):
            if Variable(name) not in atom_vars:
                raise RuleError(
                    f"rule {self.id!r}: message references unbound {{{name}}}"
                )

    def pattern_variables(self) -> set[Variable]:
        out: set[Variable] = set()
        for atom in self.atoms:
            out |= atom.variables()
        return out

    def variables(self) -> set[Variable]:
        out = self.pattern_variables()
        for f in self.filters:
            out |= f.variables()
        return out

    @property
    def signed_score(self) -> Decimal:
        """Score contribution of one match: positive adds, negative subtracts."""
        if self.severity == HARD:
            return Decimal("0")
        return self.score if self.polarity == POSITIVE else -self.score


class RuleSet:
    def __init__(self, rules: Iterable[Rule] = ()):
        self.rules: list[Rule] = []
        self._by_id: dict[str, Rule] = {}
        for rule in rules:
            self.append(rule)

    def append(self, rule: Rule):
        if rule.id in self._by_id:
            raise RuleError(f"duplicate rule id {rule.id!r}")
        self._by_id[rule.id] = rule
        self.rules.append(rule)

    def __iter__(self):
        return iter(self.rules)

    def __len__(self):
        return len(self.rules)

    def __getitem__(self, rule_id: str) -> Rule:
        return self._by_id[rule_id]

    def __contains__(self, rule_id: str) -> bool:
        return rule_id in self._by_id

    def index_of(self, rule_id: str) -> int:
        return self.rules.index(self._by_id[rule_id])

    def without(self, rule_id: str) -> "RuleSet":
        return RuleSet(r for r in self.rules if r.id != rule_id)


@dataclass(frozen=True)
class Match:
    rule_id: str
    binding: Mapping[Variable, Term]
    message: str


Binding = dict[Variable, Term]


def evaluate(
    rule: Rule,
    graph: Graph,
    seed: Mapping | None = None,
    scales: Mapping[str, OrderedScale] | None = None,
) -> list[Match]:
    """All total bindings extending `seed` under which the pattern holds.

    Deterministic: results are ordered lexicographically by the bound terms
    (variables in name order). Filters that compare off-scale or non-numeric
    values simply fail; evaluation itself never raises.
    """
    scales = scales or {}
    binding: Binding = {}
    rule_vars = rule.variables()
    for key, value in (seed or {}).items():
        var = key if isinstance(key, Variable) else Variable(str(key))
        if var not in rule_vars:
            raise RuleError(f"seed variable ?{var.name} not used by rule {rule.id!r}")
        binding[var] = value

    if not _filters_hold(rule.filters, binding, scales, partial=True):
        return []

    results: list[Binding] = []
    _search(rule, graph, list(range(len(rule.atoms))), binding, scales, results)

    order = sorted(rule_vars, key=lambda v: v.name)
    results.sort(key=lambda b: tuple(b[v].sort_key() for v in order))
    return [
        Match(rule.id, dict(b), render_message(rule.message, b, graph))
        for b in results
    ]


def _search(rule, graph, remaining, binding, scales, results):
    if not remaining:
        results.append(dict(binding))
        return
    # Most selective atom first: fewest candidate triples under the current
    # binding. Ties resolve to document order for determinism.
    best_index = None
    best_candidates = None
    for index in remaining:
        candidates = _candidates(rule.atoms[index], graph, binding)
        if best_candidates is None or len(candidates) < len(best_candidates):
            best_index = index
            best_candidates = candidates
            if not candidates:
                return
    rest = [i for i in remaining if i != best_index]
    atom = rule.atoms[best_index]
    for t in sorted(best_candidates, key=lambda t: t.sort_key()):
        extended = _unify(atom, t, binding)
        if extended is None:
            continue
        if not _filters_hold(rule.filters, extended, scales, partial=True):
            continue
        _search(rule, graph, rest, extended, scales, results)


def _resolve(part: PatternTerm, binding: Binding) -> Term | None:
    if isinstance(part, Variable):
        return binding.get(part)
    return part


def _candidates(atom: PatternAtom, graph: Graph, binding: Binding) -> set:
    return graph.lookup(
        subject=_resolve(atom.subject, binding),
        predicate=atom.predicate,
        object=_resolve(atom.object, binding),
    )


def _unify(atom: PatternAtom, t, binding: Binding) -> Binding | None:
    extended = dict(binding)
    for part, value in ((atom.subject, t.subject), (atom.object, t.object)):
        if isinstance(part, Variable):
            bound = extended.get(part)
            if bound is None:
                extended[part] = value
            elif bound != value:
                return None
        elif part != value:
            return None
    return extended


def _filters_hold(filters, binding: Binding, scales, partial: bool) -> bool:
    for f in filters:
        left = binding.get(f.left)
        right = _resolve(f.right, binding)
        if left is None or right is None:
            if partial:
                continue
            return False
        if not _filter_passes(f, left, right, scales):
            return False
    return True


def _filter_passes(f: Filter, left: Term, right: Term, scales) -> bool:
    if f.op == "eq":
        return left == right
    if f.op == "neq":
        return left != right
    if f.op in _NUM_OPS:
        a, b = _as_number(left), _as_number(right)
        if a is None or b is None:
            return False
        return a >= b if f.op == "numGreaterEq" else a < b
    # Scale comparison: both operands must be levels of the named scale.
    scale = scales.get(f.scale or "")
    if scale is None or left not in scale or right not in scale:
        return False
    diff = scale.rank(left) - scale.rank(right)
    return diff >= 0 if f.op == "scaleGreaterEq" else diff < 0


def _as_number(term: Term):
    if term.kind == INT:
        return Decimal(term.value)
    if term.kind == DEC:
        return term.value
    return None


def render_message(template: str, binding: Mapping, graph: Graph | None = None) -> str:
    """Substitute `{var}` placeholders with display labels.

    Identifiers resolve through their `label` triple when a graph is given,
    falling back to the raw identifier; literals render plainly.
    """
    normalized = {
        (k.name if isinstance(k, Variable) else str(k)): v for k, v in binding.items()
    }

    def substitute(match: re.Match) -> str:
        name = match.group(1)
        if name not in normalized:
            raise UnboundPlaceholderError(name)
        return display_term(normalized[name], graph)

    return _PLACEHOLDER.sub(substitute, template)


def display_term(term: Term, graph: Graph | None = None) -> str:
    if term.is_identifier and graph is not None:
        labels = [
            t.object.value
            for t in graph.lookup(subject=term, predicate=LABEL)
            if t.object.kind == "str"
        ]
        if labels:
            return sorted(labels)[0]
    return term.plain()


_STANZA_KEYS = (
    "task-var",
    "resource-var",
    "pattern",
    "filter",
    "polarity",
    "severity",
    "score",
    "message",
)
_KEY_LINE = re.compile(r"^([a-z][a-z-]*):")


def parse_rules(source, scales: Iterable[str] | Ontology = ()) -> RuleSet:
    """Parse a rule document; `scales` names the ordered scales in force."""
    if isinstance(scales, Ontology):
        scale_names = set(scales.scales)
    else:
        scale_names = set(scales)
    text = source if isinstance(source, str) else source.read()
    parser = _RuleParser(scale_names)
    for lineno, raw in enumerate(text.splitlines(), start=1):
        parser.feed(lineno, raw)
    parser.flush()
    return parser.ruleset


def load_rules(path: str, scales: Iterable[str] | Ontology = ()) -> RuleSet:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_rules(handle, scales)


class _RuleParser:
    def __init__(self, scale_names: set[str]):
        self.scale_names = scale_names
        self.ruleset = RuleSet()
        self.rule_id = None
        self.rule_line = 0
        self.fields: dict[str, str] = {}
        self.atoms: list[PatternAtom] = []
        self.filters: list[tuple[Filter, int]] = []
        self.in_pattern = False

    def feed(self, lineno: int, raw: str):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            return
        col = len(raw) - len(raw.lstrip()) + 1
        if stripped.startswith("rule ") or stripped == "rule":
            self.flush()
            rule_id = stripped[4:].strip()
            if not rule_id or " " in rule_id:
                raise RuleParseError("rule header needs a single id", lineno, col)
            self.rule_id = rule_id
            self.rule_line = lineno
            return
        if self.rule_id is None:
            raise RuleParseError(f"expected 'rule <id>', got {stripped!r}", lineno, col)
        key_match = _KEY_LINE.match(stripped)
        if key_match:
            key = key_match.group(1)
            if key not in _STANZA_KEYS:
                raise RuleParseError(f"unknown field {key!r}", lineno, col)
            value = stripped[key_match.end() :].strip()
            self.in_pattern = key == "pattern"
            if key == "pattern":
                if value:
                    self._pattern_line(value, lineno, col)
                return
            if key == "filter":
                self.filters.append((self._parse_filter(value, lineno, col), lineno))
                return
            if key in self.fields:
                raise RuleParseError(f"duplicate field {key!r}", lineno, col)
            self.fields[key] = value
            return
        if self.in_pattern:
            self._pattern_line(stripped, lineno, col)
            return
        raise RuleParseError(f"unexpected line {stripped!r}", lineno, col)

    def _pattern_line(self, text: str, lineno: int, col: int):
        try:
            tokens = tokenize_line(text)
        except MalformedTermError as exc:
            raise RuleParseError(str(exc), lineno, col) from exc
        if len(tokens) != 3:
            raise RuleParseError(
                f"pattern line needs 3 terms, got {len(tokens)}", lineno, col
            )
        subject = self._pattern_term(tokens[0], lineno, col)
        predicate = self._pattern_term(tokens[1], lineno, col)
        object_ = self._pattern_term(tokens[2], lineno, col)
        if isinstance(predicate, Variable):
            raise RuleParseError("predicate must be a constant", lineno, col)
        if isinstance(subject, Term) and not subject.is_identifier:
            raise RuleParseError("pattern subject must not be a literal", lineno, col)
        self.atoms.append(PatternAtom(subject, predicate, object_))

    def _pattern_term(self, token: str, lineno: int, col: int) -> PatternTerm:
        if token.startswith("?"):
            name = token[1:]
            if not name:
                raise RuleParseError("empty variable name", lineno, col)
            return Variable(name)
        try:
            return parse_token(token)
        except MalformedTermError as exc:
            raise RuleParseError(str(exc), lineno, col) from exc

    def _parse_filter(self, text: str, lineno: int, col: int) -> Filter:
        try:
            tokens = tokenize_line(text)
        except MalformedTermError as exc:
            raise RuleParseError(str(exc), lineno, col) from exc
        scale = None
        if len(tokens) >= 2 and tokens[-2] == "on":
            scale = tokens[-1]
            tokens = tokens[:-2]
        if len(tokens) != 3:
            raise RuleParseError(
                "filter syntax: <op> ?left <right> [on <scale>]", lineno, col
            )
        op, left_token, right_token = tokens
        if op not in FILTER_OPS:
            raise RuleParseError(f"unknown filter op {op!r}", lineno, col)
        left = self._pattern_term(left_token, lineno, col)
        if not isinstance(left, Variable):
            raise RuleParseError("filter left operand must be a variable", lineno, col)
        right = self._pattern_term(right_token, lineno, col)
        if op in _SCALE_OPS:
            if scale is None:
                raise RuleParseError(f"{op} needs 'on <scale>'", lineno, col)
            if scale not in self.scale_names:
                raise UnknownScaleError(f"unknown scale {scale!r}", lineno, col)
        elif scale is not None:
            raise RuleParseError(f"{op} does not take a scale", lineno, col)
        return Filter(op=op, left=left, right=right, scale=scale)

    def _focus_var(self, key: str) -> Variable:
        value = self.fields.get(key, "")
        if not value.startswith("?") or len(value) < 2:
            raise RuleParseError(
                f"{key} must name a variable like ?t", self.rule_line
            )
        return Variable(value[1:])

    def flush(self):
        if self.rule_id is None:
            return
        for key in ("task-var", "resource-var", "message"):
            if key not in self.fields:
                raise RuleParseError(
                    f"rule {self.rule_id!r} is missing {key!r}", self.rule_line
                )
        score_text = self.fields.get("score", "0")
        try:
            score = Decimal(score_text)
        except InvalidOperation:
            raise RuleParseError(
                f"bad score {score_text!r}", self.rule_line
            ) from None
        try:
            rule = Rule(
                id=self.rule_id,
                task_var=self._focus_var("task-var"),
                resource_var=self._focus_var("resource-var"),
                atoms=list(self.atoms),
                filters=[f for f, _ in self.filters],
                polarity=self.fields.get("polarity", POSITIVE),
                severity=self.fields.get("severity", SOFT),
                score=score,
                message=self.fields["message"],
            )
        except RuleParseError:
            raise
        except RuleError as exc:
            if "does not occur in the pattern" in str(exc):
                raise UnboundFocusVariableError(str(exc), self.rule_line) from exc
            raise RuleParseError(str(exc), self.rule_line) from exc
        try:
            self.ruleset.append(rule)
        except RuleError as exc:
            raise RuleParseError(str(exc), self.rule_line) from exc
        self.rule_id = None
        self.rule_line = 0
        self.fields = {}
        self.atoms = []
        self.filters = []
        self.in_pattern = False
