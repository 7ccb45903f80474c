import type { Api } from "./api.js";
import { ApiError } from "./api.js";
import type { AppState } from "./state.js";
import { card, draft, removeDecision, syncDecisions } from "./state.js";
import type { TripleWire, UpdateWire } from "./types.js";

// All mutation flows live here, DOM-free, so the contract tests can drive
// them against recorded payloads.

export async function refresh(state: AppState, api: Api): Promise<void> {
    try {
        state.server = await api.getState();
        syncDecisions(state, await api.getDecisions());
        if (state.view === "updates") {
            state.proposals = await api.getUpdates();
        }
        state.connectionLost = false;
    } catch (error) {
        if (error instanceof ApiError) {
            throw error;
        }
        state.connectionLost = true;
    }
}

export async function submitDecision(state: AppState, api: Api, decisionId: string): Promise<void> {
    const current = card(state, decisionId);
    if (!current.selection) {
        return;
    }
    try {
        const result = await api.submitDecision(decisionId, current.selection);
        removeDecision(state, decisionId);
        state.toast = `Assigned ${result.chosen} to ${result.task_id}`;
    } catch (error) {
        if (!(error instanceof ApiError)) {
            state.connectionLost = true;
            return;
        }
        const ineligible = error.ineligible();
        if (ineligible) {
            // Hard constraint: keep the card, show the server's messages.
            current.errors = ineligible.messages ?? ["Selection is not eligible."];
            return;
        }
        if (error.status === 409 || error.status === 404) {
            // Decided elsewhere: drop our stale card and re-sync.
            removeDecision(state, decisionId);
            await refresh(state, api);
            return;
        }
        throw error;
    }
}

export async function toggleExcerpt(state: AppState, api: Api, decisionId: string, node: string): Promise<void> {
    const current = card(state, decisionId);
    if (current.showExcerpt) {
        current.showExcerpt = false;
        return;
    }
    if (!current.excerpt) {
        current.excerpt = await api.getNeighborhood(node, 2);
    }
    current.showExcerpt = true;
}

export async function reviewProposal(
    state: AppState,
    api: Api,
    proposalId: string,
    verdict: "accept" | "reject",
): Promise<void> {
    try {
        await api.reviewUpdate(proposalId, verdict);
        delete state.proposalErrors[proposalId];
    } catch (error) {
        if (error instanceof ApiError) {
            state.proposalErrors[proposalId] =
                typeof error.detail === "string" ? error.detail : `review failed (HTTP ${error.status})`;
        } else {
            state.connectionLost = true;
            return;
        }
    }
    state.proposals = await api.getUpdates();
}

export function draftToUpdate(rows: { subject: string; predicate: string; object: string; remove: boolean }[], provenance: string): UpdateWire {
    const additions: TripleWire[] = [];
    const removals: TripleWire[] = [];
    for (const row of rows) {
        if (!row.subject.trim() || !row.predicate.trim() || !row.object.trim()) {
            continue;
        }
        const triple = {
            subject: row.subject.trim(),
            predicate: row.predicate.trim(),
            object: row.object.trim(),
        };
        (row.remove ? removals : additions).push(triple);
    }
    return { additions, removals, provenance };
}

export async function submitAmendment(state: AppState, api: Api, proposalId: string): Promise<void> {
    const current = draft(state, proposalId);
    const update = draftToUpdate(current.rows, current.provenance);
    if (update.additions.length + update.removals.length === 0) {
        current.error = "Nothing to amend: fill in at least one full triple.";
        return;
    }
    try {
        await api.reviewUpdate(proposalId, "amend", update);
        current.open = false;
        current.error = null;
    } catch (error) {
        if (error instanceof ApiError) {
            current.error = typeof error.detail === "string" ? error.detail : `amend failed (HTTP ${error.status})`;
        } else {
            state.connectionLost = true;
            return;
        }
    }
    state.proposals = await api.getUpdates();
}

export async function proposeUpdate(state: AppState, api: Api, row: { subject: string; predicate: string; object: string; remove: boolean }, provenance: string): Promise<void> {
    const update = draftToUpdate([row], provenance);
    if (update.additions.length + update.removals.length === 0) {
        return;
    }
    await api.proposeUpdate(update);
    state.proposals = await api.getUpdates();
}
