"""HTTP service: simulation control, pending decisions, and update review.

The service owns the simulator and graph behind a lock; handlers serialize
through it, and the simulation advances to quiescence whenever the state is
touched (parked decisions are the only thing that can block progress).
"""

from __future__ import annotations

import threading

from fastapi import FastAPI, HTTPException, Query
from fastapi.middleware.cors import CORSMiddleware

from ..graph import GraphUpdate, UpdateError
from ..ontology import LABEL, validate
from ..proposals import InvalidTransitionError, ProposalLog, UpdateProposal
from ..reasoner import (
    IneligibleSelectionError,
    NoEligibleResourceError,
    rank,
)
from ..scenario import Session, open_session
from ..simulator import DecisionAlreadyTakenError
from ..terms import MalformedTermError, Term, Triple, ident, parse_token
from ..vocab import (
    HAS_APPLICATION_TYPE,
    HAS_LOAN_GOAL,
    REQUESTED_AMOUNT,
    TYPE,
)
from .schemas import (
    CandidateView,
    CaseAttributesView,
    ControlRequest,
    DecisionRequest,
    DecisionResult,
    EdgeView,
    ExplanationView,
    NeighborhoodView,
    NodeView,
    PendingDecisionView,
    ProposalView,
    ReviewRequest,
    StateView,
    TripleWire,
    UpdateWire,
)


class ServiceState:
    """The simulation session plus everything handlers may touch."""

    def __init__(self, session: Session, *, block_all: bool = False,
                 proposal_journal: str | None = None):
        self.lock = threading.RLock()
        self.session = session
        self.block_all = block_all
        self.proposals = ProposalLog(proposal_journal)

    def advance(self):
        """Run the simulation until it needs input (or is paused)."""
        sim = self.session.sim
        while not sim.paused and sim.has_work():
            if self.block_all and sim.pending:
                break
            sim.step()


def create_app(
    scenario_path: str,
    *,
    seed: int | None = None,
    cases: int | None = None,
    mode: str = "human",
    paused: bool = True,
    block_all: bool = False,
    proposal_journal: str | None = None,
) -> FastAPI:
    session = open_session(scenario_path, seed=seed, cases=cases, mode=mode)
    if paused:
        session.sim.pause()
    service = ServiceState(session, block_all=block_all,
                           proposal_journal=proposal_journal)
    app = FastAPI(title="kgalloc service")
    # The operator UI is served statically from anywhere; this is a desk
    # tool without authentication (see Non-goals), so open CORS is fine.
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.service = service
    _register_routes(app, service)
    return app


def _register_routes(app: FastAPI, service: ServiceState):
    sim = service.session.sim
    graph = service.session.graph
    ontology = service.session.ontology
    rules = service.session.rules

    def state_view() -> StateView:
        return StateView(
            scenario=service.session.scenario.name,
            clock=sim.clock,
            mode=sim.mode,
            paused=sim.paused,
            counts=sim.counts(),
        )

    @app.get("/state", response_model=StateView)
    def get_state():
        with service.lock:
            service.advance()
            return state_view()

    @app.post("/control", response_model=StateView)
    def control(request: ControlRequest):
        with service.lock:
            if request.action == "pause":
                sim.pause()
            elif request.action == "resume":
                sim.resume()
            elif request.action == "mode":
                if request.mode is None:
                    raise HTTPException(422, "action 'mode' needs a mode")
                sim.set_mode(request.mode)
            service.advance()
            return state_view()

    @app.get("/decisions", response_model=list[PendingDecisionView])
    def list_decisions():
        with service.lock:
            service.advance()
            views = []
            for decision_id in sorted(sim.pending, key=_pending_order):
                views.append(_decision_view(service, sim.pending[decision_id]))
            return views

    @app.post("/decisions/{decision_id}", response_model=DecisionResult)
    def resolve_decision(decision_id: str, request: DecisionRequest):
        with service.lock:
            if decision_id in sim.resolved_decisions:
                raise HTTPException(409, f"decision {decision_id} already taken")
            if decision_id not in sim.pending:
                raise HTTPException(404, f"unknown decision {decision_id}")
            try:
                decision = sim.submit_decision(decision_id, request.resource)
            except IneligibleSelectionError as exc:
                raise HTTPException(
                    409,
                    {
                        "error": "ineligible-selection",
                        "resource": exc.resource_id,
                        "messages": exc.messages,
                    },
                )
            except NoEligibleResourceError as exc:
                raise HTTPException(
                    409, {"error": "no-eligible-resource", "task": exc.task_id}
                )
            except DecisionAlreadyTakenError:
                raise HTTPException(409, f"decision {decision_id} already taken")
            service.advance()
            return DecisionResult(
                id=decision_id,
                task_id=decision.task_id,
                chosen=decision.chosen,
                mode=decision.mode,
                divergence=decision.divergence,
                explanation=decision.explanation,
            )

    @app.get("/explanations", response_model=list[ExplanationView])
    def explanations(caseId: str | None = Query(default=None)):
        with service.lock:
            return [
                ExplanationView(
                    task_id=d.task_id,
                    case_id=d.case_id,
                    chosen=d.chosen,
                    text=d.explanation,
                )
                for d in sim.decisions
                if caseId is None or d.case_id == caseId
            ]

    @app.get("/updates", response_model=list[ProposalView])
    def list_updates():
        with service.lock:
            return [_proposal_view(p) for p in service.proposals]

    @app.post("/updates", response_model=ProposalView)
    def propose(request: UpdateWire):
        with service.lock:
            try:
                update = _update_from_wire(request)
            except (MalformedTermError, UpdateError) as exc:
                raise HTTPException(422, str(exc))
            proposal = service.proposals.propose(update, ontology)
            return _proposal_view(proposal)

    @app.post("/updates/{proposal_id}", response_model=ProposalView)
    def review(proposal_id: str, request: ReviewRequest):
        with service.lock:
            if service.proposals.get(proposal_id) is None:
                raise HTTPException(404, f"unknown proposal {proposal_id}")
            try:
                if request.action == "amend":
                    if request.update is None:
                        raise HTTPException(422, "amend needs an update body")
                    new_update = _update_from_wire(request.update)
                    result = service.proposals.review(
                        proposal_id, "amend", new_update, ontology
                    )
                else:
                    result = service.proposals.review(proposal_id, request.action)
                    if request.action == "accept":
                        service.proposals.apply(proposal_id, graph)
            except InvalidTransitionError as exc:
                raise HTTPException(409, str(exc))
            except (MalformedTermError, UpdateError) as exc:
                raise HTTPException(422, str(exc))
            return _proposal_view(result)

    @app.get("/graph/neighborhood", response_model=NeighborhoodView)
    def neighborhood(node: str, depth: int = Query(default=2, ge=1, le=4)):
        with service.lock:
            try:
                center = parse_token(node)
            except MalformedTermError as exc:
                raise HTTPException(422, str(exc))
            if not graph.lookup(subject=center) and not graph.lookup(object=center):
                raise HTTPException(404, f"unknown node {node}")
            return _neighborhood(graph, center, depth)

    @app.get("/validation")
    def validation():
        with service.lock:
            report = validate(graph, ontology)
            return {
                "violations": [
                    {"triple": v.triple.line(), "reason": v.reason}
                    for v in report.violations
                ],
                "warnings": report.warnings,
            }


def _pending_order(decision_id: str) -> int:
    try:
        return int(decision_id.lstrip("d"))
    except ValueError:
        return 0


def _decision_view(service: ServiceState, parked) -> PendingDecisionView:
    session = service.session
    sim = session.sim
    task = sim.tasks[parked.task_id]
    try:
        assessments = rank(task.task_id, session.graph, session.rules, session.ontology)
    except NoEligibleResourceError as exc:
        assessments = exc.assessments
    candidates = [
        CandidateView(
            resource=a.resource_id,
            score=float(a.score),
            eligible=a.eligible,
            findings=[f.message for f in a.findings],
            violations=[f.message for f in a.hard_violations],
        )
        for a in assessments
    ]
    case = ident(task.case_id)
    amount = session.graph.object(case, REQUESTED_AMOUNT)
    application_type = session.graph.object(case, HAS_APPLICATION_TYPE)
    loan_goal = session.graph.object(case, HAS_LOAN_GOAL)
    activity = ident(task.activity)
    labels = [
        t.object.value
        for t in session.graph.lookup(subject=activity, predicate=LABEL)
        if t.object.kind == "str"
    ]
    return PendingDecisionView(
        id=parked.decision_id,
        task_id=task.task_id,
        case_id=task.case_id,
        activity=task.activity,
        activity_label=sorted(labels)[0] if labels else task.activity,
        attributes=CaseAttributesView(
            application_type=application_type.value if application_type else "",
            loan_goal=loan_goal.value if loan_goal else "",
            requested_amount=float(amount.value) if amount else 0.0,
        ),
        candidates=candidates,
        created_at=parked.created_at,
    )


def _proposal_view(proposal: UpdateProposal) -> ProposalView:
    return ProposalView(
        id=proposal.id,
        status=proposal.status,
        provenance=proposal.update.provenance,
        rendering=list(proposal.rendering),
        supersedes=proposal.supersedes,
        superseded_by=proposal.superseded_by,
    )


def _update_from_wire(wire: UpdateWire) -> GraphUpdate:
    def convert(t: TripleWire) -> Triple:
        return Triple(
            parse_token(t.subject), parse_token(t.predicate), parse_token(t.object)
        )

    return GraphUpdate(
        additions=[convert(t) for t in wire.additions],
        removals=[convert(t) for t in wire.removals],
        provenance=wire.provenance,
    )


def _neighborhood(graph, center: Term, depth: int) -> NeighborhoodView:
    seen = {center}
    frontier = [center]
    edges: set[Triple] = set()
    for _ in range(depth):
        next_frontier = []
        for node in frontier:
            incident = set()
            if node.is_identifier:
                incident |= graph.lookup(subject=node)
            incident |= graph.lookup(object=node)
            for t in incident:
                edges.add(t)
                for neighbor in (t.subject, t.object):
                    if neighbor not in seen:
                        seen.add(neighbor)
                        next_frontier.append(neighbor)
        frontier = next_frontier
    nodes = []
    for node in sorted(seen, key=Term.sort_key):
        labels = [
            t.object.value
            for t in graph.lookup(subject=node, predicate=LABEL)
            if t.object.kind == "str"
        ] if node.is_identifier else []
        types = sorted(
            t.object.value
            for t in graph.lookup(subject=node, predicate=TYPE)
            if t.object.is_identifier
        ) if node.is_identifier else []
        nodes.append(
            NodeView(
                id=node.token(),
                label=sorted(labels)[0] if labels else node.plain(),
                types=types,
            )
        )
    edge_views = [
        EdgeView(
            source=t.subject.token(),
            predicate=t.predicate.value,
            target=t.object.token(),
        )
        for t in sorted(edges, key=Triple.sort_key)
    ]
    return NeighborhoodView(
        center=center.token(), depth=depth, nodes=nodes, edges=edge_views
    )
