"""Command-line entry points for batch workflows and the HTTP service."""

from __future__ import annotations

import json
import os
import sys

import click

from .graph import load_graph, save_graph
from .mining import (
    EventLogFormatError,
    derive_expertise,
    derive_permissions,
    derive_seniority,
    parse_event_log,
)
from .ontology import Ontology, OntologyError, load_ontology, validate
from .proposals import ProposalLog
from .rules import RuleParseError, load_rules
from .scenario import ScenarioError, open_session, resolve_scenario
from .simulator import write_decision_journal, write_explanation_log
from .terms import MalformedTermError


@click.group()
def main():
    """Knowledge-graph-based resource allocation for business processes."""


def _load_ontology_or_fail(path):
    try:
        return load_ontology(path)
    except (OSError, OntologyError) as exc:
        raise click.ClickException(f"cannot load ontology: {exc}")


@main.command("load-graph")
@click.argument("path", type=click.Path())
@click.option("--ontology", "ontology_path", type=click.Path(), default=None,
              help="Validate the graph against this ontology.")
@click.option("--normalize", "normalize_path", type=click.Path(), default=None,
              help="Write the canonical (sorted) form of the graph here.")
def load_graph_command(path, ontology_path, normalize_path):
    """Parse a graph file, optionally validating and normalizing it."""
    try:
        graph = load_graph(path)
    except (OSError, MalformedTermError) as exc:
        raise click.ClickException(f"cannot load graph: {exc}")
    click.echo(f"loaded {len(graph)} triples from {path}")
    if normalize_path:
        save_graph(graph, normalize_path)
        click.echo(f"wrote normalized graph to {normalize_path}")
    if ontology_path:
        report = validate(graph, _load_ontology_or_fail(ontology_path))
        for warning in report.warnings:
            click.echo(f"warning: {warning}")
        for violation in report.violations:
            click.echo(f"violation: {violation.reason} ({violation.triple.line()})")
        if report.violations:
            raise click.ClickException(f"{len(report.violations)} violations")
        click.echo("no violations")


@main.command("load-ontology")
@click.argument("path", type=click.Path())
def load_ontology_command(path):
    """Parse an ontology document and report its contents."""
    ontology = _load_ontology_or_fail(path)
    click.echo(
        f"loaded {len(ontology.classes)} classes, {len(ontology.relations)} "
        f"relations, {len(ontology.scales)} scales from {path}"
    )


@main.command("load-rules")
@click.argument("path", type=click.Path())
@click.option("--ontology", "ontology_path", type=click.Path(), default=None,
              help="Ontology declaring the scales that rules may use.")
def load_rules_command(path, ontology_path):
    """Parse a rule document and report its contents."""
    ontology = _load_ontology_or_fail(ontology_path) if ontology_path else Ontology()
    try:
        ruleset = load_rules(path, ontology)
    except (OSError, RuleParseError) as exc:
        raise click.ClickException(f"cannot load rules: {exc}")
    click.echo(f"loaded {len(ruleset)} rules from {path}")
    for rule in ruleset:
        click.echo(
            f"  {rule.id}: {len(rule.atoms)} atoms, {len(rule.filters)} filters, "
            f"{rule.polarity} {rule.severity}"
        )


@main.command("mine")
@click.option("--log", "log_path", type=click.Path(), required=True)
@click.option("--emit", type=click.Choice(["seniority", "expertise", "permissions"]),
              required=True)
@click.option("--journal", "journal_path", type=click.Path(), default="proposals.jsonl",
              show_default=True)
@click.option("--ontology", "ontology_path", type=click.Path(), default=None,
              help="Ontology used to phrase the proposal rendering.")
@click.option("--attribute", type=click.Choice(["ApplicationType", "LoanGoal"]),
              default="ApplicationType", show_default=True)
@click.option("--threshold", type=float, default=0.8, show_default=True)
@click.option("--floor", type=int, default=5, show_default=True)
def mine_command(log_path, emit, journal_path, ontology_path, attribute, threshold, floor):
    """Derive resource profiles from an event log into a proposal journal."""
    try:
        result = parse_event_log(log_path)
    except (OSError, EventLogFormatError) as exc:
        raise click.ClickException(f"cannot parse event log: {exc}")
    for reject in result.rejects:
        click.echo(f"reject {reject.where}: {reject.reason}")
    if not result.records:
        raise click.ClickException("event log has no completed tasks")
    if emit == "seniority":
        update = derive_seniority(result.records)
    elif emit == "expertise":
        update = derive_expertise(result.records, attribute, threshold, floor)
    else:
        update = derive_permissions(result.records)
    ontology = _load_ontology_or_fail(ontology_path) if ontology_path else Ontology()
    journal = ProposalLog(journal_path)
    proposal = journal.propose(update, ontology)
    click.echo(
        f"proposal {proposal.id}: {len(update.additions)} additions "
        f"({update.provenance}) -> {journal_path}"
    )


@main.command("simulate")
@click.option("--scenario", "scenario_arg", default="demo", show_default=True)
@click.option("--seed", type=int, default=None, help="Override the scenario seed.")
@click.option("--cases", type=int, default=None, help="Override the case count.")
@click.option("--mode", type=click.Choice(["auto"]), default="auto", show_default=True,
              help="Batch runs are automatic; use 'serve' for human-in-the-loop.")
@click.option("--out-dir", type=click.Path(), default=".", show_default=True)
@click.option("--until", type=int, default=None, help="Stop the clock after this time.")
def simulate_command(scenario_arg, seed, cases, mode, out_dir, until):
    """Run the process simulation and write its logs and journals."""
    try:
        session = open_session(scenario_arg, seed=seed, cases=cases, mode="automatic")
    except ScenarioError as exc:
        raise click.UsageError(str(exc))
    summary = session.sim.run(until=until)
    os.makedirs(out_dir, exist_ok=True)
    events_path = os.path.join(out_dir, "events.csv")
    decisions_path = os.path.join(out_dir, "decisions.jsonl")
    explanations_path = os.path.join(out_dir, "explanations.log")
    session.sim.write_event_log(events_path)
    write_decision_journal(session.sim.decisions, decisions_path)
    write_explanation_log(session.sim.decisions, explanations_path)
    click.echo(
        f"simulated to clock {summary.clock}: {summary.cases_completed} cases "
        f"completed, {summary.tasks_completed} tasks completed"
    )
    if summary.deadlocked_tasks:
        click.echo(f"deadlocked tasks: {', '.join(summary.deadlocked_tasks)}")
    click.echo(f"wrote {events_path}, {decisions_path}, {explanations_path}")


@main.command("report")
@click.option("--journal", "journal_path", type=click.Path(), required=True)
@click.option("--case", "case_id", default=None, help="Only this case's decisions.")
def report_command(journal_path, case_id):
    """Print the decision explanations recorded in a journal."""
    try:
        handle = open(journal_path, "r", encoding="utf-8")
    except OSError as exc:
        raise click.ClickException(f"cannot open journal: {exc}")
    shown = 0
    with handle:
        for line in handle:
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            if case_id and record.get("case") != case_id:
                continue
            click.echo(record["explanation"])
            click.echo("")
            shown += 1
    if not shown:
        click.echo("no decisions found")


@main.command("serve")
@click.option("--scenario", "scenario_arg",
              default=lambda: os.environ.get("KGALLOC_SCENARIO", "demo"),
              help="Scenario name or path [env: KGALLOC_SCENARIO].")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int,
              default=lambda: int(os.environ.get("KGALLOC_PORT", "8000")),
              help="Port to bind [env: KGALLOC_PORT, default 8000].")
@click.option("--seed", type=int, default=None)
@click.option("--cases", type=int, default=None)
@click.option("--mode", type=click.Choice(["automatic", "human"]), default="human",
              show_default=True)
@click.option("--running/--paused", default=False,
              help="Start with the clock running instead of paused.")
@click.option("--block-all", is_flag=True, default=False,
              help="Strict pausing: a pending decision stalls all cases.")
@click.option("--proposal-journal", type=click.Path(), default=None)
def serve_command(scenario_arg, host, port, seed, cases, mode, running, block_all,
                  proposal_journal):
    """Serve the HTTP API over a loaded scenario."""
    import uvicorn

    from .service.app import create_app

    try:
        resolved = resolve_scenario(scenario_arg)
    except ScenarioError as exc:
        raise click.UsageError(str(exc))
    app = create_app(
        resolved,
        seed=seed,
        cases=cases,
        mode=mode,
        paused=not running,
        block_all=block_all,
        proposal_journal=proposal_journal,
    )
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    sys.exit(main())
