import random

import pytest

from kgalloc.graph import Graph, loads_graph
from kgalloc.rules import (
    Filter,
    PatternAtom,
    Rule,
    RuleError,
    RuleParseError,
    UnboundFocusVariableError,
    UnboundPlaceholderError,
    UnknownScaleError,
    Variable,
    evaluate,
    parse_rules,
    render_message,
)
from kgalloc.terms import Triple, ident, integer, triple

from matcher_oracle import SCALES, binding_set, oracle_matches, random_instance

T = Variable("t")
R = Variable("r")


# -- parsing -----------------------------------------------------------------


def test_demo_rule_file_parses(demo_session):
    rules = demo_session.rules
    assert len(rules) == 5
    seniority = rules["seniority-sufficient"]
    assert len(seniority.atoms) == 7
    assert len(seniority.filters) == 1
    assert seniority.filters[0].op == "scaleGreaterEq"
    assert seniority.filters[0].scale == "Seniority"


def test_single_rule_document_parses_to_one_rule():
    doc = """
rule risk-seniority
  task-var: ?t
  resource-var: ?r
  pattern:
    ?t performedBy ?r
    ?t partOf ?c
    ?c hasLoanGoal ?lg
    ?lg hasRiskClass ?rc
    ?rc minSeniority ?s2
    ?r seniority ?s1
    ?r type Resource
  filter: scaleGreaterEq ?s1 ?s2 on Seniority
  polarity: positive
  severity: soft
  score: 2.0
  message: Seniority '{s1}' is sufficient for risk class '{rc}' of loan goal '{lg}'
"""
    rules = parse_rules(doc, scales=["Seniority"])
    assert len(rules) == 1
    rule = rules["risk-seniority"]
    assert len(rule.atoms) == 7
    assert [f.op for f in rule.filters] == ["scaleGreaterEq"]


def test_empty_document_gives_empty_ruleset():
    assert len(parse_rules("")) == 0
    assert len(parse_rules("# only comments\n\n")) == 0


def test_message_with_unbound_placeholder_is_parse_error():
    doc = """
rule bad
  task-var: ?t
  resource-var: ?r
  pattern:
    ?t p ?r
  message: mentions unbound {x}
"""
    with pytest.raises(RuleParseError):
        parse_rules(doc)


def test_unknown_scale_is_rejected():
    doc = """
rule bad
  task-var: ?t
  resource-var: ?r
  pattern:
    ?t p ?r
    ?r level ?s
  filter: scaleGreaterEq ?s ?s on Ghost
  message: m
"""
    with pytest.raises(UnknownScaleError):
        parse_rules(doc, scales=["Seniority"])


def test_focus_variable_missing_from_pattern():
    doc = """
rule bad
  task-var: ?t
  resource-var: ?r
  pattern:
    ?t p ?x
  message: m
"""
    with pytest.raises(UnboundFocusVariableError):
        parse_rules(doc)


def test_unknown_field_rejected_with_position():
    doc = "rule bad\n  task-var: ?t\n  wild: yes\n"
    with pytest.raises(RuleParseError) as err:
        parse_rules(doc)
    assert err.value.line == 3


def test_duplicate_rule_id_is_a_parse_error():
    stanza = """
rule twin
  task-var: ?t
  resource-var: ?r
  pattern:
    ?t p ?r
  message: m
"""
    with pytest.raises(RuleParseError):
        parse_rules(stanza + stanza)


def test_hard_positive_rule_is_rejected():
    doc = """
rule bad
  task-var: ?t
  resource-var: ?r
  pattern:
    ?t p ?r
  polarity: positive
  severity: hard
  message: m
"""
    with pytest.raises(RuleParseError):
        parse_rules(doc)


def test_filter_variable_must_come_from_pattern():
    with pytest.raises(RuleError):
        Rule(
            id="bad",
            task_var=T,
            resource_var=R,
            atoms=[PatternAtom(T, ident("p"), R)],
            filters=[Filter("eq", Variable("ghost"), ident("x"))],
            message="m",
        )


# -- evaluation against the demo fixture -------------------------------------


def test_fig_pattern_match_for_suitable_candidate(decision_session):
    s = decision_session
    rule = s.rules["seniority-sufficient"]
    # The hypothetical assignment only exists while assessing; assert it here.
    hypothesis = triple("task-7", "performedBy", "User_26")
    s.graph.add(hypothesis)
    try:
        matches = evaluate(
            rule,
            s.graph,
            {rule.task_var: ident("task-7"), rule.resource_var: ident("User_26")},
            s.ontology.scales,
        )
    finally:
        s.graph.discard(hypothesis)
    assert len(matches) == 1
    assert (
        matches[0].message
        == "Seniority 'High' is sufficient for risk class 'High' of loan goal 'Car'"
    )


def test_insufficient_seniority_matches_negative_twin(decision_session):
    s = decision_session
    hypothesis = triple("task-7", "performedBy", "User_83")
    s.graph.add(hypothesis)
    try:
        seed = {"t": ident("task-7"), "r": ident("User_83")}
        positive = evaluate(s.rules["seniority-sufficient"], s.graph, seed, s.ontology.scales)
        negative = evaluate(s.rules["seniority-insufficient"], s.graph, seed, s.ontology.scales)
    finally:
        s.graph.discard(hypothesis)
    assert positive == []
    assert len(negative) == 1


def test_any_rule_on_empty_graph_matches_nothing(demo_session):
    empty = Graph()
    for rule in demo_session.rules:
        assert evaluate(rule, empty, scales=demo_session.ontology.scales) == []


# -- message rendering --------------------------------------------------------


def test_render_message_substitutes_labels(demo_session):
    g = demo_session.graph
    text = render_message(
        "Seniority '{s1}' is sufficient for risk class '{rc}' of loan goal '{lg}'",
        {"s1": ident("High"), "rc": ident("RiskClass_High"), "lg": ident("Car")},
        g,
    )
    assert text == "Seniority 'High' is sufficient for risk class 'High' of loan goal 'Car'"


def test_render_message_verbatim_without_placeholders():
    assert render_message("No placeholders here.", {}) == "No placeholders here."


def test_render_message_for_soc_line(demo_session):
    text = render_message(
        "Assignment conforms separation of concerns with activity '{a}'",
        {"a": ident("W_Validate_application")},
        demo_session.graph,
    )
    assert text == (
        "Assignment conforms separation of concerns with activity "
        "'W_Validate application'"
    )


def test_render_message_unbound_placeholder_raises():
    with pytest.raises(UnboundPlaceholderError):
        render_message("hello {who}", {})


def test_render_message_falls_back_to_identifier():
    assert render_message("{x}", {"x": ident("User_26")}, Graph()) == "User_26"


def test_render_message_renders_literals_plainly():
    assert render_message("{n}", {"n": integer(2016)}) == "2016"


# -- matcher properties --------------------------------------------------------


def test_matcher_agrees_with_brute_force_oracle():
    rng = random.Random(90125)
    for _ in range(120):
        rule, graph, seed = random_instance(rng)
        got = evaluate(rule, graph, seed, SCALES)
        expected = oracle_matches(rule, graph, seed, SCALES)
        assert binding_set(got) == binding_set(expected)


def test_matching_is_monotone_under_added_triples():
    rng = random.Random(5150)
    for _ in range(60):
        rule, graph, seed = random_instance(rng)
        before = binding_set(evaluate(rule, graph, seed, SCALES))
        nodes = sorted({t.subject for t in graph}, key=lambda t: t.sort_key())
        if not nodes:
            continue
        for _ in range(rng.randint(1, 6)):
            graph.add(
                Triple(rng.choice(nodes), ident(f"p{rng.randrange(4)}"), rng.choice(nodes))
            )
        after = binding_set(evaluate(rule, graph, seed, SCALES))
        assert before <= after


def test_every_result_extends_the_seed():
    rng = random.Random(2112)
    for _ in range(80):
        rule, graph, seed = random_instance(rng)
        for match in evaluate(rule, graph, seed, SCALES):
            for var, value in seed.items():
                assert match.binding[var] == value


def test_total_seed_yields_at_most_one_match():
    rng = random.Random(1984)
    checked = 0
    for _ in range(500):
        rule, graph, seed = random_instance(rng)
        matches = evaluate(rule, graph, seed, SCALES)
        if not matches:
            continue
        total_seed = dict(matches[0].binding)
        total = evaluate(rule, graph, total_seed, SCALES)
        assert len(total) == 1
        checked += 1
    assert checked > 20


def test_evaluation_is_deterministic():
    rng = random.Random(777)
    for _ in range(40):
        rule, graph, seed = random_instance(rng)
        first = evaluate(rule, graph, seed, SCALES)
        second = evaluate(rule, graph, seed, SCALES)
        assert [m.binding for m in first] == [m.binding for m in second]


def test_result_order_is_lexicographic():
    g = loads_graph("a p x\na p y\nb p x\n")
    rule = Rule(
        id="order",
        task_var=T,
        resource_var=R,
        atoms=[PatternAtom(T, ident("p"), R)],
        message="",
    )
    matches = evaluate(rule, g)
    pairs = [(m.binding[R].value, m.binding[T].value) for m in matches]
    assert pairs == [("x", "a"), ("x", "b"), ("y", "a")]
