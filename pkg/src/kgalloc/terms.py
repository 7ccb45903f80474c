"""Typed terms and triples, the atomic units of the knowledge graph.

A term is either an identifier (a graph node) or a literal of one of four
kinds: string, integer, decimal, boolean. Triples are (subject, predicate,
object) with identifiers in subject and predicate position.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from typing import Union

LiteralValue = Union[str, int, Decimal, bool]

ID = "id"
STR = "str"
INT = "int"
DEC = "dec"
BOOL = "bool"

LITERAL_KINDS = (STR, INT, DEC, BOOL)
KINDS = (ID,) + LITERAL_KINDS

# Stable ordering of kinds, used for deterministic term ordering.
_KIND_RANK = {kind: i for i, kind in enumerate(KINDS)}

_WHITESPACE = re.compile(r"\s")


class MalformedTermError(ValueError):
    """An ill-formed term, or a term used in an illegal triple position."""


@dataclass(frozen=True)
class Term:
    kind: str
    value: LiteralValue

    def __post_init__(self):
        if self.kind not in KINDS:
            raise MalformedTermError(f"unknown term kind {self.kind!r}")
        if self.kind == ID:
            if not isinstance(self.value, str) or not self.value:
                raise MalformedTermError("identifiers must be non-empty strings")
            if _WHITESPACE.search(self.value):
                raise MalformedTermError(
                    f"identifier {self.value!r} contains whitespace"
                )
            if self.value.startswith('"') or self.value.startswith("?"):
                raise MalformedTermError(
                    f"identifier {self.value!r} starts with a reserved character"
                )
        elif self.kind == STR:
            if not isinstance(self.value, str):
                raise MalformedTermError("string literal value must be str")
        elif self.kind == INT:
            if not isinstance(self.value, int) or isinstance(self.value, bool):
                raise MalformedTermError("integer literal value must be int")
        elif self.kind == DEC:
            if not isinstance(self.value, Decimal):
                raise MalformedTermError("decimal literal value must be Decimal")
        elif self.kind == BOOL:
            if not isinstance(self.value, bool):
                raise MalformedTermError("boolean literal value must be bool")

    @property
    def is_identifier(self) -> bool:
        return self.kind == ID

    @property
    def is_literal(self) -> bool:
        return self.kind != ID

    def token(self) -> str:
        """Render the term in graph-file token syntax."""
        if self.kind == ID:
            return self.value  # type: ignore[return-value]
        if self.kind == STR:
            return '"%s"' % _escape(self.value)  # type: ignore[arg-type]
        if self.kind == INT:
            return f"{self.value}^^int"
        if self.kind == DEC:
            return f"{self.value}^^dec"
        return ("true" if self.value else "false") + "^^bool"

    def plain(self) -> str:
        """Value as plain human-readable text (no quoting or kind suffix)."""
        if self.kind == BOOL:
            return "true" if self.value else "false"
        return str(self.value)

    def sort_key(self) -> tuple:
        return (_KIND_RANK[self.kind], self.token())

    def __repr__(self):
        return f"Term({self.token()})"


def ident(name: str) -> Term:
    return Term(ID, name)


def string(value: str) -> Term:
    return Term(STR, value)


def integer(value: int) -> Term:
    return Term(INT, value)


def decimal(value) -> Term:
    if not isinstance(value, Decimal):
        value = Decimal(str(value))
    return Term(DEC, value)


def boolean(value: bool) -> Term:
    return Term(BOOL, value)


_ESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\t": "\\t", "\r": "\\r"}
_UNESCAPES = {"\\": "\\", '"': '"', "n": "\n", "t": "\t", "r": "\r"}


def _escape(raw: str) -> str:
    return "".join(_ESCAPES.get(ch, ch) for ch in raw)


def _unescape(raw: str, where: str) -> str:
    out = []
    i = 0
    while i < len(raw):
        ch = raw[i]
        if ch == "\\":
            if i + 1 >= len(raw) or raw[i + 1] not in _UNESCAPES:
                raise MalformedTermError(f"bad escape in string literal {where}")
            out.append(_UNESCAPES[raw[i + 1]])
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


_INT_TOKEN = re.compile(r"^(-?\d+)\^\^int$")
_DEC_TOKEN = re.compile(r"^(-?\d+(?:\.\d+)?)\^\^dec$")
_BOOL_TOKEN = re.compile(r"^(true|false)\^\^bool$")


def parse_token(token: str) -> Term:
    """Parse one graph-file token into a Term."""
    if token.startswith('"'):
        if not token.endswith('"') or len(token) < 2:
            raise MalformedTermError(f"unterminated string literal: {token!r}")
        return string(_unescape(token[1:-1], token))
    m = _INT_TOKEN.match(token)
    if m:
        return integer(int(m.group(1)))
    m = _DEC_TOKEN.match(token)
    if m:
        try:
            return decimal(Decimal(m.group(1)))
        except InvalidOperation as exc:
            raise MalformedTermError(f"bad decimal literal: {token!r}") from exc
    m = _BOOL_TOKEN.match(token)
    if m:
        return boolean(m.group(1) == "true")
    if "^^" in token:
        raise MalformedTermError(f"unknown literal kind in token {token!r}")
    return ident(token)


def tokenize_line(line: str) -> list[str]:
    """Split a graph-file line into tokens, honoring quoted string literals."""
    tokens = []
    i = 0
    n = len(line)
    while i < n:
        if line[i].isspace():
            i += 1
            continue
        if line[i] == "#":
            break
        if line[i] == '"':
            j = i + 1
            while j < n:
                if line[j] == "\\":
                    j += 2
                    continue
                if line[j] == '"':
                    break
                j += 1
            if j >= n:
                raise MalformedTermError(f"unterminated string literal in: {line!r}")
            tokens.append(line[i : j + 1])
            i = j + 1
        else:
            j = i
            while j < n and not line[j].isspace():
                j += 1
            tokens.append(line[i:j])
            i = j
    return tokens


@dataclass(frozen=True)
class Triple:
    subject: Term
    predicate: Term
    object: Term

    def __post_init__(self):
        if not self.subject.is_identifier:
            raise MalformedTermError(
                f"literal {self.subject!r} cannot appear in subject position"
            )
        if not self.predicate.is_identifier:
            raise MalformedTermError(
                f"literal {self.predicate!r} cannot appear in predicate position"
            )

    def line(self) -> str:
        return f"{self.subject.token()} {self.predicate.token()} {self.object.token()}"

    def sort_key(self) -> tuple:
        return (
            self.subject.sort_key(),
            self.predicate.sort_key(),
            self.object.sort_key(),
        )

    def __repr__(self):
        return f"Triple({self.line()})"


def triple(subject, predicate, object) -> Triple:
    """Build a triple, coercing bare strings to identifier terms."""
    return Triple(_coerce(subject), _coerce(predicate), _coerce(object))


def _coerce(value) -> Term:
    if isinstance(value, Term):
        return value
    if isinstance(value, str):
        return ident(value)
    raise MalformedTermError(f"cannot coerce {value!r} to a term")


def parse_triple_line(line: str) -> Triple | None:
    """Parse one line of graph-file syntax; None for blank/comment lines."""
    tokens = tokenize_line(line)
    if not tokens:
        return None
    if len(tokens) != 3:
        raise MalformedTermError(
            f"expected 3 terms per line, got {len(tokens)}: {line!r}"
        )
    return Triple(parse_token(tokens[0]), parse_token(tokens[1]), parse_token(tokens[2]))
