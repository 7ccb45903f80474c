"""Explainable knowledge-graph-based resource allocation for business processes."""

from .graph import Graph, GraphUpdate, load_graph, loads_graph, save_graph
from .ontology import Ontology, OrderedScale, compare_scale, load_ontology, parse_ontology, validate
from .reasoner import (
    AllocationDecision,
    Assessment,
    assess,
    decide_automatic,
    decide_human,
    eligible_resources,
    rank,
)
from .rules import Match, Rule, RuleSet, evaluate, load_rules, parse_rules, render_message
from .terms import Term, Triple, boolean, decimal, ident, integer, string, triple

__all__ = [
    "AllocationDecision",
    "Assessment",
    "Graph",
    "GraphUpdate",
    "Match",
    "Ontology",
    "OrderedScale",
    "Rule",
    "RuleSet",
    "Term",
    "Triple",
    "assess",
    "boolean",
    "compare_scale",
    "decide_automatic",
    "decide_human",
    "decimal",
    "eligible_resources",
    "evaluate",
    "ident",
    "integer",
    "load_graph",
    "load_ontology",
    "load_rules",
    "loads_graph",
    "parse_ontology",
    "parse_rules",
    "rank",
    "render_message",
    "save_graph",
    "string",
    "triple",
    "validate",
]
