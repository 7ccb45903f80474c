import { HttpApi } from "./api.js";
import {
    proposeUpdate,
    refresh,
    reviewProposal,
    submitAmendment,
    submitDecision,
    toggleExcerpt,
} from "./controller.js";
import { renderApp } from "./render.js";
import { draft, initialState, selectCandidate } from "./state.js";

const POLL_INTERVAL_MS = 2000;

const apiBase =
    new URLSearchParams(window.location.search).get("api") ??
    (window as { KGALLOC_API?: string }).KGALLOC_API ??
    "";
const api = new HttpApi(apiBase);
const state = initialState();
const root = document.getElementById("app") as HTMLElement;

function paint(): void {
    root.innerHTML = renderApp(state);
}

async function poll(): Promise<void> {
    try {
        await refresh(state, api);
    } catch {
        state.connectionLost = true;
    }
    paint();
}

function readAmendInputs(proposalId: string): void {
    const form = root.querySelector(`form[data-form="amend"][data-proposal="${proposalId}"]`);
    if (!form) {
        return;
    }
    const d = draft(state, proposalId);
    d.rows = Array.from(form.querySelectorAll(".triple-row")).map((row) => ({
        subject: (row.querySelector('input[name="subject"]') as HTMLInputElement).value,
        predicate: (row.querySelector('input[name="predicate"]') as HTMLInputElement).value,
        object: (row.querySelector('input[name="object"]') as HTMLInputElement).value,
        remove: (row.querySelector('input[name="remove"]') as HTMLInputElement).checked,
    }));
    d.provenance = (form.querySelector('input[name="provenance"]') as HTMLInputElement).value;
}

async function handleAction(target: HTMLElement): Promise<void> {
    const action = target.dataset["action"];
    switch (action) {
        case "select":
            selectCandidate(
                state,
                target.dataset["decision"] ?? "",
                target.dataset["resource"] ?? "",
            );
            break;
        case "submit":
            await submitDecision(state, api, target.dataset["decision"] ?? "");
            break;
        case "excerpt":
            await toggleExcerpt(
                state,
                api,
                target.dataset["decision"] ?? "",
                target.dataset["node"] ?? "",
            );
            break;
        case "page":
            state.page += Number(target.dataset["delta"] ?? 0);
            break;
        case "view":
            state.view = target.dataset["view"] === "updates" ? "updates" : "worklist";
            await refresh(state, api);
            break;
        case "pause":
            state.server = await api.control("pause");
            break;
        case "resume":
            state.server = await api.control("resume");
            await refresh(state, api);
            break;
        case "mode":
            state.server = await api.control(
                "mode",
                target.dataset["mode"] === "human" ? "human" : "automatic",
            );
            break;
        case "retry":
            await poll();
            return;
        case "review":
            await reviewProposal(
                state,
                api,
                target.dataset["proposal"] ?? "",
                target.dataset["verdict"] === "reject" ? "reject" : "accept",
            );
            break;
        case "amend-open": {
            const d = draft(state, target.dataset["proposal"] ?? "");
            d.open = !d.open;
            break;
        }
        case "amend-row": {
            const id = target.dataset["proposal"] ?? "";
            readAmendInputs(id);
            draft(state, id).rows.push({ subject: "", predicate: "", object: "", remove: false });
            break;
        }
        case "amend-submit": {
            const id = target.dataset["proposal"] ?? "";
            readAmendInputs(id);
            await submitAmendment(state, api, id);
            break;
        }
        case "propose": {
            const form = root.querySelector('form[data-form="propose"]');
            if (form) {
                const value = (name: string) =>
                    (form.querySelector(`input[name="${name}"]`) as HTMLInputElement).value;
                const remove = (form.querySelector('input[name="remove"]') as HTMLInputElement)
                    .checked;
                await proposeUpdate(
                    state,
                    api,
                    {
                        subject: value("subject"),
                        predicate: value("predicate"),
                        object: value("object"),
                        remove,
                    },
                    value("provenance"),
                );
            }
            break;
        }
        default:
            return;
    }
    paint();
}

root.addEventListener("click", (event) => {
    const target = (event.target as HTMLElement).closest<HTMLElement>("[data-action]");
    if (!target) {
        return;
    }
    if (target.dataset["action"] !== "select") {
        event.preventDefault();
    }
    void handleAction(target).catch(() => {
        state.connectionLost = true;
        paint();
    });
});

root.addEventListener("change", (event) => {
    const target = event.target as HTMLElement;
    if (target.dataset["action"] === "select") {
        selectCandidate(state, target.dataset["decision"] ?? "", target.dataset["resource"] ?? "");
        paint();
    }
});

void poll();
setInterval(() => {
    // Keep transient selections: refresh state, repaint only when not mid-form.
    void poll();
}, POLL_INTERVAL_MS);
