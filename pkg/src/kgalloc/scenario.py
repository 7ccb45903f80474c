"""Scenario configuration: fixture paths, arrivals, and the process model.

A scenario directory bundles a graph file, an ontology, a rule document,
and a YAML config describing case generation and the activity flow. The
`demo` scenario ships inside the package.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from decimal import Decimal
from importlib import resources

import yaml

from .graph import Graph, load_graph
from .ontology import Ontology, load_ontology
from .rules import RuleSet, load_rules
from .simulator import (
    ActivitySpec,
    BootstrapTask,
    CaseGeneratorConfig,
    DurationSpec,
    ProcessModel,
    Simulation,
    generate_cases,
)


class ScenarioError(ValueError):
    """A scenario that cannot be found or does not parse."""


@dataclass
class Scenario:
    name: str
    base_dir: str
    graph_path: str
    ontology_path: str
    rules_path: str
    seed: int
    cases: int
    generator: CaseGeneratorConfig
    model: ProcessModel
    bootstrap: list[BootstrapTask] = field(default_factory=list)
    task_prefix: str = "task-"
    next_task_number: int = 1
    prune_completed_cases_after: int | None = None


@dataclass
class Session:
    scenario: Scenario
    graph: Graph
    ontology: Ontology
    rules: RuleSet
    sim: Simulation


def resolve_scenario(name_or_path: str) -> str:
    """Resolve a scenario argument to a scenario.yaml path."""
    if os.path.isfile(name_or_path):
        return name_or_path
    if os.path.isdir(name_or_path):
        candidate = os.path.join(name_or_path, "scenario.yaml")
        if os.path.isfile(candidate):
            return candidate
    if "/" not in name_or_path and os.sep not in name_or_path:
        bundled = resources.files("kgalloc") / "scenarios" / name_or_path / "scenario.yaml"
        if bundled.is_file():
            return str(bundled)
    raise ScenarioError(f"scenario not found: {name_or_path}")


def load_scenario(path: str) -> Scenario:
    with open(path, "r", encoding="utf-8") as handle:
        raw = yaml.safe_load(handle)
    if not isinstance(raw, dict):
        raise ScenarioError(f"scenario file {path!r} is not a mapping")
    base = os.path.dirname(os.path.abspath(path))
    try:
        return _build_scenario(raw, base)
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"bad scenario {path!r}: {exc}") from exc


def _build_scenario(raw: dict, base: str) -> Scenario:
    arrival = raw.get("arrival", {})
    attrs = raw["attributes"]
    ids = raw.get("ids", {})
    amount = attrs["requested_amount"]
    generator = CaseGeneratorConfig(
        interarrival=_duration(arrival.get("interarrival", {"kind": "fixed", "value": 3600})),
        start_at=int(arrival.get("start_at", 0)),
        application_types=dict(attrs["application_type"]),
        loan_goals=dict(attrs["loan_goal"]),
        amount_min=Decimal(str(amount["min"])),
        amount_max=Decimal(str(amount["max"])),
        case_prefix=str(ids.get("case_prefix", "case-")),
        first_number=int(ids.get("next_case", 1)),
    )
    model = _process_model(raw["process"])
    bootstrap = [
        BootstrapTask(
            task_id=str(entry["task"]),
            case_id=str(entry["case"]),
            activity=str(entry["activity"]),
            at=int(entry.get("at", 0)),
        )
        for entry in raw.get("bootstrap", [])
    ]
    history = raw.get("history", {})
    prune = history.get("prune_completed_cases_after")
    return Scenario(
        name=str(raw.get("name", "unnamed")),
        base_dir=base,
        graph_path=os.path.join(base, raw["graph"]),
        ontology_path=os.path.join(base, raw["ontology"]),
        rules_path=os.path.join(base, raw["rules"]),
        seed=int(raw.get("seed", 0)),
        cases=int(raw.get("cases", 0)),
        generator=generator,
        model=model,
        bootstrap=bootstrap,
        task_prefix=str(ids.get("task_prefix", "task-")),
        next_task_number=int(ids.get("next_task", 1)),
        prune_completed_cases_after=None if prune is None else int(prune),
    )


def _duration(spec: dict) -> DurationSpec:
    kind = spec.get("kind", "fixed")
    if kind == "fixed":
        value = int(spec["value"])
        return DurationSpec("fixed", value, value)
    if kind == "uniform":
        return DurationSpec("uniform", int(spec["min"]), int(spec["max"]))
    raise ScenarioError(f"unknown duration kind {kind!r}")


def _process_model(raw: dict) -> ProcessModel:
    activities = [
        ActivitySpec(name=str(entry["name"]), duration=_duration(entry["duration"]))
        for entry in raw["activities"]
    ]
    names = [a.name for a in activities]
    transitions: dict[str, list] = {}
    for current, following in zip(names, names[1:] + [None]):
        transitions[current] = [(following, 1.0)]
    skip = raw.get("skip")
    if skip:
        target = str(skip["activity"])
        probability = float(skip["probability"])
        if target not in names or names.index(target) == 0:
            raise ScenarioError(f"skip activity {target!r} needs a predecessor")
        predecessor = names[names.index(target) - 1]
        after = transitions[target][0][0]
        transitions[predecessor] = [(target, 1.0 - probability), (after, probability)]
    return ProcessModel(activities=activities, transitions=transitions, start=names[0])


def build_session(
    scenario: Scenario,
    *,
    seed: int | None = None,
    cases: int | None = None,
    mode: str = "automatic",
) -> Session:
    """Load fixture files and wire a ready-to-run simulation."""
    graph = load_graph(scenario.graph_path)
    ontology = load_ontology(scenario.ontology_path)
    rules = load_rules(scenario.rules_path, ontology)
    effective_seed = scenario.seed if seed is None else seed
    sim = Simulation(
        graph,
        ontology,
        rules,
        scenario.model,
        seed=effective_seed,
        mode=mode,
        next_task_number=scenario.next_task_number,
        task_prefix=scenario.task_prefix,
        prune_completed_cases_after=scenario.prune_completed_cases_after,
    )
    for bootstrap in scenario.bootstrap:
        sim.schedule_bootstrap(bootstrap)
    case_count = scenario.cases if cases is None else cases
    for case in generate_cases(scenario.generator, case_count, effective_seed):
        sim.schedule_case(case)
    return Session(scenario=scenario, graph=graph, ontology=ontology, rules=rules, sim=sim)


def open_session(
    name_or_path: str,
    *,
    seed: int | None = None,
    cases: int | None = None,
    mode: str = "automatic",
) -> Session:
    scenario = load_scenario(resolve_scenario(name_or_path))
    return build_session(scenario, seed=seed, cases=cases, mode=mode)
