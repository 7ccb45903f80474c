// Test double for the service API, replaying a recorded demo session.

import { ApiError, type Api } from "../src/api.js";
import type {
    DecisionResult,
    Explanation,
    Neighborhood,
    PendingDecision,
    Proposal,
    StateView,
    UpdateWire,
} from "../src/types.js";

export interface RecordedSession {
    state_paused: StateView;
    decisions: PendingDecision[];
    decision_id: string;
    submit_ineligible_status: number;
    submit_ineligible: { detail: unknown };
    submit_ok: DecisionResult;
    submit_conflict_status: number;
    submit_conflict: { detail: unknown };
    decisions_after_submit: PendingDecision[];
    proposal: Proposal;
    updates: Proposal[];
    neighborhood: Neighborhood;
    explanations: Explanation[];
}

export class FakeApi implements Api {
    decisions: PendingDecision[];
    proposals: Proposal[];
    resolved = new Set<string>();
    private counter: number;

    constructor(private session: RecordedSession, { withProposals = false } = {}) {
        this.decisions = structuredClone(session.decisions);
        this.proposals = withProposals ? structuredClone(session.updates) : [];
        this.counter = this.proposals.length;
    }

    async getState(): Promise<StateView> {
        return structuredClone(this.session.state_paused);
    }

    async control(): Promise<StateView> {
        return this.getState();
    }

    async getDecisions(): Promise<PendingDecision[]> {
        return structuredClone(this.decisions);
    }

    async submitDecision(id: string, resource: string): Promise<DecisionResult> {
        if (this.resolved.has(id)) {
            throw new ApiError(409, this.session.submit_conflict.detail);
        }
        const decision = this.decisions.find((d) => d.id === id);
        if (!decision) {
            throw new ApiError(404, `unknown decision ${id}`);
        }
        const candidate = decision.candidates.find((c) => c.resource === resource);
        if (!candidate || !candidate.eligible) {
            throw new ApiError(409, this.session.submit_ineligible.detail);
        }
        this.resolved.add(id);
        this.decisions = this.decisions.filter((d) => d.id !== id);
        return structuredClone({ ...this.session.submit_ok, id, chosen: resource });
    }

    async getUpdates(): Promise<Proposal[]> {
        return structuredClone(this.proposals);
    }

    async proposeUpdate(update: UpdateWire): Promise<Proposal> {
        this.counter += 1;
        const proposal: Proposal = {
            id: `p${this.counter}`,
            status: "proposed",
            provenance: update.provenance,
            rendering: [...update.additions, ...update.removals].map(
                (t, i) =>
                    `${i < update.additions.length ? "Add" : "Remove"}: ` +
                    `'${t.subject}' ${t.predicate} '${t.object}'`,
            ),
            supersedes: null,
            superseded_by: null,
        };
        this.proposals.push(proposal);
        return structuredClone(proposal);
    }

    async reviewUpdate(
        id: string,
        action: "accept" | "reject" | "amend",
        update?: UpdateWire,
    ): Promise<Proposal> {
        const proposal = this.proposals.find((p) => p.id === id);
        if (!proposal) {
            throw new ApiError(404, `unknown proposal ${id}`);
        }
        if (proposal.status !== "proposed") {
            throw new ApiError(409, `proposal '${id}' is '${proposal.status}', not reviewable`);
        }
        if (action === "amend") {
            const replacement = await this.proposeUpdate(update as UpdateWire);
            const stored = this.proposals.find((p) => p.id === replacement.id);
            if (stored) {
                stored.supersedes = id;
            }
            proposal.status = "superseded";
            proposal.superseded_by = replacement.id;
            return structuredClone(stored ?? replacement);
        }
        proposal.status = action === "accept" ? "applied" : "rejected";
        return structuredClone(proposal);
    }

    async getNeighborhood(): Promise<Neighborhood> {
        return structuredClone(this.session.neighborhood);
    }

    async getExplanations(): Promise<Explanation[]> {
        return structuredClone(this.session.explanations);
    }
}

export class DownApi extends FakeApi {
    override async getState(): Promise<StateView> {
        throw new TypeError("fetch failed");
    }
}
