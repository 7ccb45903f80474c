import pytest

from kgalloc.graph import Graph
from kgalloc.ontology import (
    ClassDef,
    NotOnScaleError,
    Ontology,
    OntologyError,
    OrderedScale,
    RelationDef,
    compare_scale,
    parse_ontology,
    validate,
)
from kgalloc.terms import Triple, ident, integer, triple


def build_ontology():
    onto = Ontology()
    onto.add_class(ClassDef("LoanGoal"))
    onto.add_class(ClassDef("RiskClass"))
    onto.add_class(ClassDef("Case"))
    onto.add_class(ClassDef("Resource"))
    onto.add_class(ClassDef("SeniorityLevel"))
    onto.add_relation(RelationDef("hasRiskClass", "", "LoanGoal", "RiskClass"))
    onto.add_relation(RelationDef("hasLoanGoal", "", "Case", "LoanGoal"))
    onto.add_relation(
        RelationDef("seniority", "", "Resource", "SeniorityLevel", functional=True)
    )
    onto.check()
    return onto


def test_conforming_triple_has_no_violation():
    g = Graph(
        [
            triple("Car", "type", "LoanGoal"),
            triple("High", "type", "RiskClass"),
            triple("Car", "hasRiskClass", "High"),
        ]
    )
    report = validate(g, build_ontology())
    assert report.violations == []


def test_literal_where_class_required_is_one_violation():
    g = Graph(
        [
            triple("case-1", "type", "Case"),
            Triple(ident("case-1"), ident("hasLoanGoal"), integer(7)),
        ]
    )
    report = validate(g, build_ontology())
    assert len(report.violations) == 1
    assert "literal" in report.violations[0].reason


def test_functional_duplicate_is_one_violation():
    g = Graph(
        [
            triple("User_9", "type", "Resource"),
            triple("Low", "type", "SeniorityLevel"),
            triple("High", "type", "SeniorityLevel"),
            triple("User_9", "seniority", "Low"),
            triple("User_9", "seniority", "High"),
        ]
    )
    report = validate(g, build_ontology())
    assert len(report.violations) == 1
    assert "functional" in report.violations[0].reason


def test_undeclared_predicate_is_warning_not_violation():
    g = Graph([triple("a", "mystery", "b")])
    report = validate(g, build_ontology())
    assert report.violations == []
    assert report.warnings == ["undeclared predicate 'mystery'"]


def test_domain_contradiction_flagged():
    g = Graph(
        [
            triple("Car", "type", "LoanGoal"),
            triple("Car", "seniority", "High"),
            triple("High", "type", "SeniorityLevel"),
        ]
    )
    report = validate(g, build_ontology())
    assert len(report.violations) == 1
    assert "domain" in report.violations[0].reason


def test_untyped_endpoints_are_open_world():
    g = Graph([triple("case-9", "hasLoanGoal", "Boat")])
    report = validate(g, build_ontology())
    assert report.violations == []


def test_subclass_satisfies_domain():
    onto = Ontology()
    onto.add_class(ClassDef("Performer"))
    onto.add_class(ClassDef("Resource", parent="Performer"))
    onto.add_class(ClassDef("Activity"))
    onto.add_relation(RelationDef("canBeExecutedBy", "", "Activity", "Performer"))
    onto.check()
    g = Graph(
        [
            triple("W_X", "type", "Activity"),
            triple("User_1", "type", "Resource"),
            triple("W_X", "canBeExecutedBy", "User_1"),
        ]
    )
    assert validate(g, onto).violations == []


def test_parent_cycle_rejected():
    onto = Ontology()
    onto.add_class(ClassDef("A", parent="B"))
    with pytest.raises(OntologyError):
        onto.add_class(ClassDef("B", parent="A"))


def test_unknown_domain_rejected_at_check():
    onto = Ontology()
    onto.add_relation(RelationDef("p", "", "Ghost", "int"))
    with pytest.raises(OntologyError):
        onto.check()


def test_demo_fixture_validates_clean(demo_session, demo_ontology):
    report = validate(demo_session.graph, demo_ontology)
    assert report.violations == []
    assert report.warnings == []


# -- ordered scales ----------------------------------------------------------


SENIORITY = OrderedScale("Seniority", (ident("Low"), ident("Medium"), ident("High")))


def test_equal_levels_compare_equal():
    assert compare_scale(SENIORITY, ident("High"), ident("High")) == 0


def test_lower_level_compares_less():
    assert compare_scale(SENIORITY, ident("Medium"), ident("High")) == -1


@pytest.mark.parametrize("level", ["Low", "Medium", "High"])
def test_comparison_is_reflexive(level):
    assert compare_scale(SENIORITY, ident(level), ident(level)) == 0


def test_off_scale_term_raises():
    with pytest.raises(NotOnScaleError):
        compare_scale(SENIORITY, ident("Cosmic"), ident("High"))


def test_duplicate_scale_levels_rejected():
    with pytest.raises(OntologyError):
        OrderedScale("S", (ident("A"), ident("A")))


# -- document parsing --------------------------------------------------------


def test_parse_ontology_document():
    onto = parse_ontology(
        """
class Person
  description: A human

class Employee
  description: Someone on payroll
  parent: Person

relation manages
  description: manages
  domain: Employee
  range: Person

scale Grade
  levels: Junior Senior Principal
"""
    )
    assert set(onto.classes) == {"Person", "Employee"}
    assert onto.relations["manages"].domain == "Employee"
    assert [level.value for level in onto.scales["Grade"].levels] == [
        "Junior",
        "Senior",
        "Principal",
    ]
    assert onto.ancestors("Employee") == {"Employee", "Person"}


def test_parse_ontology_rejects_unknown_field():
    with pytest.raises(OntologyError):
        parse_ontology("class A\n  color: blue\n")


def test_parse_ontology_rejects_relation_without_range():
    with pytest.raises(OntologyError):
        parse_ontology("relation p\n  domain: A\n")
