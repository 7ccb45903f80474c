import json
from decimal import Decimal

import pytest

from kgalloc.graph import Graph, GraphUpdate
from kgalloc.ontology import parse_ontology
from kgalloc.reasoner import assess
from kgalloc.rules import parse_rules
from kgalloc.scenario import open_session
from kgalloc.simulator import (
    ActivitySpec,
    CaseGeneratorConfig,
    DurationSpec,
    ProcessModel,
    Simulation,
    SimulationPausedError,
    decision_record,
    generate_cases,
)
from kgalloc.terms import ident, triple


def fixed(value):
    return DurationSpec("fixed", value, value)


def make_generator(**overrides):
    config = dict(
        interarrival=fixed(100),
        start_at=0,
        application_types={"Limit_raise": 0.5, "New_credit": 0.5},
        loan_goals={"Car": 0.5, "Home": 0.5},
        amount_min=Decimal("1000.00"),
        amount_max=Decimal("9000.00"),
    )
    config.update(overrides)
    return CaseGeneratorConfig(**config)


# -- case generation -----------------------------------------------------------


def test_generate_zero_cases():
    assert generate_cases(make_generator(), 0, seed=1) == []


def test_generation_is_deterministic_for_a_seed():
    config = make_generator()
    assert generate_cases(config, 5, seed=42) == generate_cases(config, 5, seed=42)


def test_forced_attributes_reach_every_case_and_the_graph():
    config = make_generator(
        application_types={"Limit_raise": 1.0}, loan_goals={"Car": 1.0}
    )
    cases = generate_cases(config, 4, seed=7)
    assert all(c.loan_goal == "Car" for c in cases)
    assert all(c.application_type == "Limit_raise" for c in cases)

    session = open_session("demo", cases=0)
    sim = session.sim
    for case in cases:
        sim.schedule_case(case)
    while sim.step():
        pass
    edges = sim.graph.lookup(predicate=ident("hasLoanGoal"), object=ident("Car"))
    assert {t.subject.value for t in edges} >= {c.case_id for c in cases}


# -- stepping ------------------------------------------------------------------


def test_automatic_step_decides_the_worked_example():
    session = open_session("demo", cases=0)
    sim = session.sim
    assert sim.step()
    assert len(sim.decisions) == 1
    decision = sim.decisions[0]
    assert decision.task_id == "task-7"
    assert decision.chosen == "User_26"
    assert sim.tasks["task-7"].state == "running"


def test_human_mode_parks_the_task(decision_session):
    sim = decision_session.sim
    assert len(sim.pending) == 1
    assert sim.tasks["task-7"].state == "pending-decision"
    assert sim.decisions == []


def test_step_on_empty_queue_changes_nothing():
    session = open_session("demo", cases=0)
    sim = session.sim
    while sim.step():
        pass
    clock = sim.clock
    rows = len(sim.event_rows)
    assert sim.step() is False
    assert sim.clock == clock
    assert len(sim.event_rows) == rows


def test_step_while_paused_is_an_error(decision_session):
    sim = decision_session.sim
    sim.pause()
    with pytest.raises(SimulationPausedError):
        sim.step()


def test_resume_without_pause_is_a_noop():
    session = open_session("demo", cases=0)
    session.sim.resume()
    assert session.sim.paused is False


# -- full runs -------------------------------------------------------------------


def test_run_completes_all_cases_without_deadlock():
    session = open_session("demo", cases=10, seed=7)
    summary = session.sim.run()
    # 10 generated cases plus the mid-flight bootstrap case from the fixture.
    assert summary.cases_completed == 11
    assert summary.deadlocked_tasks == []
    assert session.sim.check_conservation()
    # Exactly one recorded decision per started task.
    decided = [d.task_id for d in session.sim.decisions]
    assert len(decided) == len(set(decided))


def test_run_is_deterministic_in_memory():
    records = []
    for _ in range(2):
        session = open_session("demo", cases=12, seed=42)
        session.sim.run()
        records.append(
            (
                session.sim.event_rows,
                [json.dumps(decision_record(d), sort_keys=True) for d in session.sim.decisions],
            )
        )
    assert records[0] == records[1]


def test_one_to_one_holds_at_every_step():
    session = open_session("demo", cases=8, seed=3)
    sim = session.sim
    while True:
        if not sim.step():
            break
        assert sim.check_one_to_one()


def test_event_timestamps_are_non_decreasing():
    session = open_session("demo", cases=8, seed=11)
    sim = session.sim
    sim.run()
    stamps = [int(row[5]) for row in sim.event_rows]
    assert stamps == sorted(stamps)


def test_completed_tasks_are_mirrored_into_the_graph():
    session = open_session("demo", cases=5, seed=5)
    sim = session.sim
    sim.run()
    for row in sim.event_rows:
        if row[4] != "completed":
            continue
        task, resource = ident(row[1]), ident(row[3])
        assert triple(row[1], "performedBy", row[3]) in sim.graph
        assert sim.graph.object(task, ident("endedAt")) is not None
        assert sim.graph.object(task, ident("startedAt")) is not None


def test_human_run_with_callback_completes():
    session = open_session("demo", cases=3, seed=9, mode="human")

    def pick_first_eligible(sim, decision_id, task_id):
        from kgalloc.reasoner import rank

        ranked = rank(task_id, sim.graph, sim.rules, sim.ontology)
        return ranked[0].resource_id

    summary = session.sim.run(decide=pick_first_eligible)
    assert summary.cases_completed == 4
    assert summary.deadlocked_tasks == []
    assert all(d.mode == "human" for d in session.sim.decisions)


def test_human_run_without_callback_is_a_precondition_error():
    session = open_session("demo", cases=1, mode="human")
    with pytest.raises(ValueError):
        session.sim.run()


# -- deadlock ---------------------------------------------------------------------


DEADLOCK_ONTOLOGY = """
class Activity
class Task
class Case
class Resource
class SoCGroup

relation canBeExecutedBy
  domain: Activity
  range: Resource

relation inGroup
  domain: Activity
  range: SoCGroup

relation instanceOf
  domain: Task
  range: Activity
  functional: true

relation partOf
  domain: Task
  range: Case
  functional: true

relation performedBy
  domain: Task
  range: Resource
  functional: true
"""

SOC_RULES = """
rule soc-violation
  task-var: ?t
  resource-var: ?r
  pattern:
    ?t performedBy ?r
    ?t partOf ?c
    ?t instanceOf ?a
    ?a inGroup ?g
    ?a2 inGroup ?g
    ?t2 instanceOf ?a2
    ?t2 partOf ?c
    ?t2 performedBy ?r
  filter: neq ?t2 ?t
  polarity: negative
  severity: hard
  message: Assignment violates separation of concerns with activity '{a2}'
"""


def test_sole_permitted_resource_blocked_by_soc_deadlocks():
    graph = Graph(
        [
            triple("Act1", "type", "Activity"),
            triple("Act2", "type", "Activity"),
            triple("Act1", "inGroup", "g1"),
            triple("Act2", "inGroup", "g1"),
            triple("g1", "type", "SoCGroup"),
            triple("only", "type", "Resource"),
            triple("Act1", "canBeExecutedBy", "only"),
            triple("Act2", "canBeExecutedBy", "only"),
        ]
    )
    model = ProcessModel(
        activities=[
            ActivitySpec("Act1", fixed(10)),
            ActivitySpec("Act2", fixed(10)),
        ],
        transitions={"Act1": [("Act2", 1.0)], "Act2": [(None, 1.0)]},
        start="Act1",
    )
    sim = Simulation(
        graph,
        parse_ontology(DEADLOCK_ONTOLOGY),
        parse_rules(SOC_RULES),
        model,
        seed=1,
    )
    sim.schedule_case(
        generate_cases(make_generator(), 1, seed=1)[0]
    )
    summary = sim.run()
    assert summary.cases_completed == 0
    assert len(summary.deadlocked_tasks) == 1
    assert sim.check_conservation()


# -- run-time knowledge change ------------------------------------------------------


def test_pause_update_resume_changes_next_assessment(decision_session):
    s = decision_session
    sim = s.sim
    before = assess("task-7", "User_83", s.graph, s.rules, s.ontology)

    sim.pause()
    update = GraphUpdate(
        additions=[triple("User_83", "seniority", "High")],
        removals=[triple("User_83", "seniority", "Medium")],
        provenance="promotion",
    )
    update.accept()
    s.graph.apply(update)
    sim.resume()

    after = assess("task-7", "User_83", s.graph, s.rules, s.ontology)
    rules_before = {f.rule_id for f in before.findings}
    rules_after = {f.rule_id for f in after.findings}
    assert "seniority-insufficient" in rules_before
    assert "seniority-sufficient" in rules_after
    assert "seniority-insufficient" not in rules_after
    assert after.score - before.score == Decimal("4.0")


def test_mode_switch_takes_effect_for_next_enablement():
    session = open_session("demo", cases=1)
    sim = session.sim
    sim.step()  # bootstrap task decided automatically
    assert sim.pending == {}
    sim.set_mode("human")
    while sim.step():
        if sim.pending:
            break
    assert len(sim.pending) == 1


def test_automatic_mode_drains_parked_decisions_before_advancing(decision_session):
    sim = decision_session.sim
    assert len(sim.pending) == 1
    sim.set_mode("automatic")
    sim.step()
    assert sim.pending == {}
    assert sim.tasks["task-7"].state in ("running", "completed")
    assert sim.decisions[0].mode == "automatic"


def test_run_can_stop_after_a_case_count():
    session = open_session("demo", cases=10, seed=21)
    summary = session.sim.run(until_cases=3)
    assert summary.cases_completed >= 3
    assert summary.cases_completed < 11


def test_graph_stays_schema_clean_after_a_run():
    from kgalloc.ontology import validate

    session = open_session("demo", cases=5, seed=2)
    session.sim.run()
    report = validate(session.graph, session.ontology)
    assert report.violations == []
    assert report.warnings == []


# -- history aggregation --------------------------------------------------------


def test_execution_stats_track_completed_work():
    session = open_session("demo", cases=6, seed=4)
    sim = session.sim
    sim.run()
    expected = {}
    for row in sim.event_rows:
        if row[4] == "completed":
            expected[(row[3], row[2])] = expected.get((row[3], row[2]), 0) + 1
    for (resource, activity), count in expected.items():
        stat = ident(f"exec-{resource}-{activity}")
        stored = sim.graph.object(stat, ident("statCount"))
        assert stored is not None and stored.value == count


def test_pruning_keeps_aggregates_but_drops_old_task_triples():
    session = open_session("demo", cases=6, seed=4)
    sim = session.sim
    sim.prune_completed_cases_after = 1
    sim.run()
    pruned_cases = [
        case_id
        for case_id in sim.cases
        if case_id not in sim._completed_case_order
    ]
    assert pruned_cases, "expected at least one pruned case"
    for task in sim.tasks.values():
        if task.case_id in pruned_cases and task.state == "completed":
            assert sim.graph.lookup(subject=ident(task.task_id)) == set()
    # Aggregates survive pruning.
    stats = sim.graph.lookup(predicate=ident("statCount"))
    assert stats
    # The retained window still carries full task triples.
    kept = sim._completed_case_order[-1]
    kept_tasks = [t for t in sim.tasks.values() if t.case_id == kept]
    assert any(sim.graph.lookup(subject=ident(t.task_id)) for t in kept_tasks)
