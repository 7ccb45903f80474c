import type { AppState, CardState } from "./state.js";
import { PAGE_SIZE, pageCount, pageDecisions } from "./state.js";
import type { Candidate, Neighborhood, PendingDecision, Proposal } from "./types.js";

export function escapeHtml(raw: string): string {
    return raw
        .replace(/&/g, "&amp;")
        .replace(/</g, "&lt;")
        .replace(/>/g, "&gt;")
        .replace(/"/g, "&quot;")
        .replace(/'/g, "&#39;");
}

export function renderApp(state: AppState): string {
    const parts = [renderHeader(state)];
    if (state.connectionLost) {
        parts.push(
            '<div class="banner" data-testid="connection-lost">Connection lost.' +
                ' <button data-action="retry">Retry</button></div>',
        );
    }
    if (state.toast) {
        parts.push(`<div class="toast">${escapeHtml(state.toast)}</div>`);
    }
    parts.push(state.view === "worklist" ? renderWorklist(state) : renderUpdates(state));
    return parts.join("\n");
}

function renderHeader(state: AppState): string {
    const server = state.server;
    const status = server
        ? `${escapeHtml(server.scenario)} · clock ${server.clock} · ` +
          `${escapeHtml(server.mode)}${server.paused ? " · paused" : ""} · ` +
          `${server.counts["pending_decisions"] ?? 0} pending`
        : "connecting…";
    const pauseAction = server?.paused ? "resume" : "pause";
    return `<header class="topbar">
  <h1>Allocation worklist</h1>
  <span class="status">${status}</span>
  <nav>
    <button data-action="view" data-view="worklist"${state.view === "worklist" ? " class=\"active\"" : ""}>Decisions</button>
    <button data-action="view" data-view="updates"${state.view === "updates" ? " class=\"active\"" : ""}>Knowledge updates</button>
    <button data-action="${pauseAction}">${pauseAction === "pause" ? "Pause" : "Resume"}</button>
    <button data-action="mode" data-mode="${server?.mode === "human" ? "automatic" : "human"}">
      Switch to ${server?.mode === "human" ? "automatic" : "human"} mode</button>
  </nav>
</header>`;
}

export function renderWorklist(state: AppState): string {
    if (state.decisions.length === 0) {
        return '<p class="empty" data-testid="empty-worklist">No decisions pending.</p>';
    }
    const cards = pageDecisions(state)
        .map((decision) => renderCard(decision, state.cards[decision.id] ?? null))
        .join("\n");
    return `<main class="worklist">${cards}\n${renderPager(state)}</main>`;
}

function renderPager(state: AppState): string {
    const pages = pageCount(state);
    if (pages <= 1) {
        return "";
    }
    return `<footer class="pager" data-testid="pager">
  <button data-action="page" data-delta="-1"${state.page === 0 ? " disabled" : ""}>Previous</button>
  <span>Page ${state.page + 1} of ${pages} (${state.decisions.length} pending, ${PAGE_SIZE} per page)</span>
  <button data-action="page" data-delta="1"${state.page >= pages - 1 ? " disabled" : ""}>Next</button>
</footer>`;
}

export function renderCard(decision: PendingDecision, card: CardState | null): string {
    const selection = card?.selection ?? null;
    const candidates = decision.candidates
        .map((candidate) => renderCandidate(decision.id, candidate, selection))
        .join("\n");
    const attrs = decision.attributes;
    const errorBox = card?.errors
        ? `<div class="error" data-testid="card-error">${card.errors
              .map((m) => `<p>${escapeHtml(m)}</p>`)
              .join("")}</div>`
        : "";
    const excerpt = card?.showExcerpt && card.excerpt ? renderExcerpt(card.excerpt) : "";
    return `<section class="card" data-decision="${escapeHtml(decision.id)}">
  <header>
    <h3>${escapeHtml(decision.task_id)} · ${escapeHtml(decision.activity_label)}</h3>
    <span class="case">${escapeHtml(decision.case_id)} · ${escapeHtml(attrs.application_type)},
      ${escapeHtml(attrs.loan_goal)}, amount ${attrs.requested_amount}</span>
  </header>
  <ul class="candidates">
${candidates}
  </ul>
  ${errorBox}
  <footer>
    <button data-action="submit" data-decision="${escapeHtml(decision.id)}"${selection ? "" : " disabled"}>Assign selected</button>
    <button data-action="excerpt" data-decision="${escapeHtml(decision.id)}" data-node="${escapeHtml(decision.task_id)}">
      ${card?.showExcerpt ? "Hide" : "Show"} graph excerpt</button>
  </footer>
  ${excerpt}
</section>`;
}

function renderCandidate(decisionId: string, candidate: Candidate, selection: string | null): string {
    const checked = selection === candidate.resource ? " checked" : "";
    const blocked = !candidate.eligible;
    const input = blocked
        ? '<input type="radio" disabled>'
        : `<input type="radio" name="pick-${escapeHtml(decisionId)}" value="${escapeHtml(candidate.resource)}"` +
          ` data-action="select" data-decision="${escapeHtml(decisionId)}"` +
          ` data-resource="${escapeHtml(candidate.resource)}"${checked}>`;
    const findings = candidate.findings.map((m) => `<li>${escapeHtml(m)}</li>`).join("");
    const violations = candidate.violations
        .map((m) => `<li class="violation">${escapeHtml(m)}</li>`)
        .join("");
    return `    <li class="candidate${blocked ? " blocked" : ""}" data-resource="${escapeHtml(candidate.resource)}">
      <label>${input} <strong>${escapeHtml(candidate.resource)}</strong></label>
      <span class="score">score ${candidate.score}</span>
      ${blocked ? '<span class="badge">not eligible</span>' : ""}
      <ul class="findings">${findings}${violations}</ul>
    </li>`;
}

export function renderExcerpt(neighborhood: Neighborhood): string {
    const labels = new Map(neighborhood.nodes.map((n) => [n.id, n.label]));
    const rows = neighborhood.edges
        .map((edge) => {
            const source = labels.get(edge.source) ?? edge.source;
            const target = labels.get(edge.target) ?? edge.target;
            return `<tr><td>${escapeHtml(source)}</td><td class="pred">${escapeHtml(edge.predicate)}</td><td>${escapeHtml(target)}</td></tr>`;
        })
        .join("");
    return `<div class="excerpt" data-testid="excerpt">
  <h4>Graph around ${escapeHtml(neighborhood.center)} (depth ${neighborhood.depth})</h4>
  <table>${rows}</table>
</div>`;
}

export function renderUpdates(state: AppState): string {
    if (state.proposals.length === 0) {
        return `<main class="updates"><p class="empty">No proposals yet.</p>${renderNewProposalForm()}</main>`;
    }
    const sections = state.proposals.map((p) => renderProposal(state, p)).join("\n");
    return `<main class="updates">${sections}\n${renderNewProposalForm()}</main>`;
}

function renderNewProposalForm(): string {
    return `<section class="new-proposal">
  <h3>Propose a change</h3>
  <form data-form="propose">
    <input name="subject" placeholder="subject">
    <input name="predicate" placeholder="predicate">
    <input name="object" placeholder="object (e.g. High or 42^^int)">
    <label><input type="checkbox" name="remove"> removal</label>
    <input name="provenance" placeholder="why">
    <button data-action="propose">Propose</button>
  </form>
</section>`;
}

export function renderProposal(state: AppState, proposal: Proposal): string {
    const lines = proposal.rendering.map((line) => `<li>${escapeHtml(line)}</li>`).join("");
    const lineage = [
        proposal.supersedes ? `supersedes ${escapeHtml(proposal.supersedes)}` : "",
        proposal.superseded_by ? `superseded by ${escapeHtml(proposal.superseded_by)}` : "",
    ]
        .filter(Boolean)
        .join(", ");
    const error = state.proposalErrors[proposal.id];
    const reviewable = proposal.status === "proposed";
    const draft = state.drafts[proposal.id];
    return `<section class="proposal" data-proposal="${escapeHtml(proposal.id)}">
  <header>
    <strong>${escapeHtml(proposal.id)}</strong>
    <span class="badge status-${escapeHtml(proposal.status)}">${escapeHtml(proposal.status)}</span>
    <span class="provenance">${escapeHtml(proposal.provenance)}</span>
    ${lineage ? `<span class="lineage">${lineage}</span>` : ""}
  </header>
  <ul class="lines">${lines}</ul>
  ${error ? `<div class="error" data-testid="proposal-error">${escapeHtml(error)}</div>` : ""}
  ${
      reviewable
          ? `<footer>
    <button data-action="review" data-proposal="${escapeHtml(proposal.id)}" data-verdict="accept">Accept</button>
    <button data-action="review" data-proposal="${escapeHtml(proposal.id)}" data-verdict="reject">Reject</button>
    <button data-action="amend-open" data-proposal="${escapeHtml(proposal.id)}">Amend</button>
  </footer>`
          : ""
  }
  ${draft?.open ? renderAmendForm(proposal.id, draft) : ""}
</section>`;
}

function renderAmendForm(proposalId: string, draft: { rows: { subject: string; predicate: string; object: string; remove: boolean }[]; provenance: string; error: string | null }): string {
    const rows = draft.rows
        .map(
            (row, i) => `<div class="triple-row" data-row="${i}">
      <input name="subject" value="${escapeHtml(row.subject)}" placeholder="subject">
      <input name="predicate" value="${escapeHtml(row.predicate)}" placeholder="predicate">
      <input name="object" value="${escapeHtml(row.object)}" placeholder="object">
      <label><input type="checkbox" name="remove"${row.remove ? " checked" : ""}> removal</label>
    </div>`,
        )
        .join("");
    return `<form class="amend-form" data-form="amend" data-proposal="${escapeHtml(proposalId)}" data-testid="amend-form">
  ${rows}
  <button data-action="amend-row" data-proposal="${escapeHtml(proposalId)}">Add triple</button>
  <input name="provenance" value="${escapeHtml(draft.provenance)}" placeholder="why">
  <button data-action="amend-submit" data-proposal="${escapeHtml(proposalId)}">Submit amendment</button>
  ${draft.error ? `<div class="error">${escapeHtml(draft.error)}</div>` : ""}
</form>`;
}
