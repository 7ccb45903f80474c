import type { Neighborhood, PendingDecision, Proposal, StateView } from "./types.js";

export const PAGE_SIZE = 10;

export interface CardState {
    selection: string | null;
    errors: string[] | null;
    excerpt: Neighborhood | null;
    showExcerpt: boolean;
}

export interface AmendDraft {
    open: boolean;
    rows: { subject: string; predicate: string; object: string; remove: boolean }[];
    provenance: string;
    error: string | null;
}

export interface AppState {
    view: "worklist" | "updates";
    server: StateView | null;
    decisions: PendingDecision[];
    cards: Record<string, CardState>;
    page: number;
    proposals: Proposal[];
    drafts: Record<string, AmendDraft>;
    proposalErrors: Record<string, string>;
    connectionLost: boolean;
    toast: string | null;
}

export function initialState(): AppState {
    return {
        view: "worklist",
        server: null,
        decisions: [],
        cards: {},
        page: 0,
        proposals: [],
        drafts: {},
        proposalErrors: {},
        connectionLost: false,
        toast: null,
    };
}

function blankCard(): CardState {
    return { selection: null, errors: null, excerpt: null, showExcerpt: false };
}

export function syncDecisions(state: AppState, decisions: PendingDecision[]): void {
    state.decisions = decisions;
    const next: Record<string, CardState> = {};
    for (const decision of decisions) {
        next[decision.id] = state.cards[decision.id] ?? blankCard();
    }
    state.cards = next;
    const pages = pageCount(state);
    if (state.page >= pages) {
        state.page = Math.max(0, pages - 1);
    }
}

export function pageCount(state: AppState): number {
    return Math.max(1, Math.ceil(state.decisions.length / PAGE_SIZE));
}

export function pageDecisions(state: AppState): PendingDecision[] {
    const start = state.page * PAGE_SIZE;
    return state.decisions.slice(start, start + PAGE_SIZE);
}

export function card(state: AppState, id: string): CardState {
    if (!state.cards[id]) {
        state.cards[id] = blankCard();
    }
    return state.cards[id] as CardState;
}

export function selectCandidate(state: AppState, id: string, resource: string): void {
    const c = card(state, id);
    c.selection = resource;
    c.errors = null;
}

export function removeDecision(state: AppState, id: string): void {
    syncDecisions(state, state.decisions.filter((d) => d.id !== id));
}

export function draft(state: AppState, proposalId: string): AmendDraft {
    if (!state.drafts[proposalId]) {
        state.drafts[proposalId] = {
            open: false,
            rows: [{ subject: "", predicate: "", object: "", remove: false }],
            provenance: "",
            error: null,
        };
    }
    return state.drafts[proposalId] as AmendDraft;
}
