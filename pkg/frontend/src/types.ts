// API payload shapes, mirrored from the service's response models.
// The UI never derives scores or eligibility; it renders these verbatim.

export interface CaseAttributes {
    application_type: string;
    loan_goal: string;
    requested_amount: number;
}

export interface Candidate {
    resource: string;
    score: number;
    eligible: boolean;
    findings: string[];
    violations: string[];
}

export interface PendingDecision {
    id: string;
    task_id: string;
    case_id: string;
    activity: string;
    activity_label: string;
    attributes: CaseAttributes;
    candidates: Candidate[];
    created_at: number;
}

export interface DecisionResult {
    id: string;
    task_id: string;
    chosen: string;
    mode: string;
    divergence: boolean;
    explanation: string;
}

export interface StateView {
    scenario: string;
    clock: number;
    mode: string;
    paused: boolean;
    counts: Record<string, number>;
}

export interface TripleWire {
    subject: string;
    predicate: string;
    object: string;
}

export interface UpdateWire {
    additions: TripleWire[];
    removals: TripleWire[];
    provenance: string;
}

export interface Proposal {
    id: string;
    status: string;
    provenance: string;
    rendering: string[];
    supersedes: string | null;
    superseded_by: string | null;
}

export interface GraphNode {
    id: string;
    label: string;
    types: string[];
}

export interface GraphEdge {
    source: string;
    predicate: string;
    target: string;
}

export interface Neighborhood {
    center: string;
    depth: number;
    nodes: GraphNode[];
    edges: GraphEdge[];
}

export interface Explanation {
    task_id: string;
    case_id: string;
    chosen: string;
    text: string;
}
