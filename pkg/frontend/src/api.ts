import type {
    DecisionResult,
    Explanation,
    Neighborhood,
    PendingDecision,
    Proposal,
    StateView,
    UpdateWire,
} from "./types.js";

export interface IneligibleDetail {
    error: string;
    resource?: string;
    messages?: string[];
}

export class ApiError extends Error {
    constructor(public status: number, public detail: unknown) {
        super(`HTTP ${status}`);
    }

    ineligible(): IneligibleDetail | null {
        const d = this.detail as IneligibleDetail | null;
        if (this.status === 409 && d && typeof d === "object" && d.error === "ineligible-selection") {
            return d;
        }
        return null;
    }
}

export interface Api {
    getState(): Promise<StateView>;
    control(action: "pause" | "resume" | "mode", mode?: "automatic" | "human"): Promise<StateView>;
    getDecisions(): Promise<PendingDecision[]>;
    submitDecision(id: string, resource: string): Promise<DecisionResult>;
    getUpdates(): Promise<Proposal[]>;
    proposeUpdate(update: UpdateWire): Promise<Proposal>;
    reviewUpdate(id: string, action: "accept" | "reject" | "amend", update?: UpdateWire): Promise<Proposal>;
    getNeighborhood(node: string, depth: number): Promise<Neighborhood>;
    getExplanations(caseId?: string): Promise<Explanation[]>;
}

export class HttpApi implements Api {
    constructor(private base: string = "") {}

    private async request<T>(path: string, init?: RequestInit): Promise<T> {
        const response = await fetch(this.base + path, {
            headers: { "content-type": "application/json" },
            ...init,
        });
        if (!response.ok) {
            let detail: unknown = null;
            try {
                detail = (await response.json()).detail;
            } catch {
                // Non-JSON error bodies keep a null detail.
            }
            throw new ApiError(response.status, detail);
        }
        return response.json() as Promise<T>;
    }

    getState(): Promise<StateView> {
        return this.request("/state");
    }

    control(action: "pause" | "resume" | "mode", mode?: "automatic" | "human"): Promise<StateView> {
        return this.request("/control", {
            method: "POST",
            body: JSON.stringify(mode === undefined ? { action } : { action, mode }),
        });
    }

    getDecisions(): Promise<PendingDecision[]> {
        return this.request("/decisions");
    }

    submitDecision(id: string, resource: string): Promise<DecisionResult> {
        return this.request(`/decisions/${encodeURIComponent(id)}`, {
            method: "POST",
            body: JSON.stringify({ resource }),
        });
    }

    getUpdates(): Promise<Proposal[]> {
        return this.request("/updates");
    }

    proposeUpdate(update: UpdateWire): Promise<Proposal> {
        return this.request("/updates", { method: "POST", body: JSON.stringify(update) });
    }

    reviewUpdate(id: string, action: "accept" | "reject" | "amend", update?: UpdateWire): Promise<Proposal> {
        return this.request(`/updates/${encodeURIComponent(id)}`, {
            method: "POST",
            body: JSON.stringify(update === undefined ? { action } : { action, update }),
        });
    }

    getNeighborhood(node: string, depth: number): Promise<Neighborhood> {
        const params = new URLSearchParams({ node, depth: String(depth) });
        return this.request(`/graph/neighborhood?${params}`);
    }

    getExplanations(caseId?: string): Promise<Explanation[]> {
        const params = caseId ? `?${new URLSearchParams({ caseId })}` : "";
        return this.request(`/explanations${params}`);
    }
}
