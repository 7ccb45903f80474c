"""Request/response models for the HTTP API."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel


class StateView(BaseModel):
    scenario: str
    clock: int
    mode: str
    paused: bool
    counts: dict[str, int]


class ControlRequest(BaseModel):
    action: Literal["pause", "resume", "mode"]
    mode: Optional[Literal["automatic", "human"]] = None


class CaseAttributesView(BaseModel):
    application_type: str
    loan_goal: str
    requested_amount: float


class CandidateView(BaseModel):
    resource: str
    score: float
    eligible: bool
    findings: list[str]
    violations: list[str]


class PendingDecisionView(BaseModel):
    id: str
    task_id: str
    case_id: str
    activity: str
    activity_label: str
    attributes: CaseAttributesView
    candidates: list[CandidateView]
    created_at: int


class DecisionRequest(BaseModel):
    resource: str


class DecisionResult(BaseModel):
    id: str
    task_id: str
    chosen: str
    mode: str
    divergence: bool
    explanation: str


class ExplanationView(BaseModel):
    task_id: str
    case_id: str
    chosen: str
    text: str


class TripleWire(BaseModel):
    """One triple in graph-file token syntax per position."""

    subject: str
    predicate: str
    object: str


class UpdateWire(BaseModel):
    additions: list[TripleWire] = []
    removals: list[TripleWire] = []
    provenance: str = ""


class ProposalView(BaseModel):
    id: str
    status: str
    provenance: str
    rendering: list[str]
    supersedes: Optional[str] = None
    superseded_by: Optional[str] = None


class ReviewRequest(BaseModel):
    action: Literal["accept", "reject", "amend"]
    update: Optional[UpdateWire] = None


class NodeView(BaseModel):
    id: str
    label: str
    types: list[str]


class EdgeView(BaseModel):
    source: str
    predicate: str
    target: str


class NeighborhoodView(BaseModel):
    center: str
    depth: int
    nodes: list[NodeView]
    edges: list[EdgeView]
