/** Pure HTML renderers.
 *
 * Every displayed number comes straight out of a server response; nothing is
 * recomputed client-side. Renderers return strings so they can be tested
 * without a DOM.
 */

import { arrow, percentWidth, prob3, signedDelta } from "./format.js";
import type { AssertionDoc, CheckDoc, MarginalDoc, ModelDoc, NodeDoc } from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderStateRow(
  node: NodeDoc,
  marginal: MarginalDoc,
  stateIndex: number,
  selectedState: string | undefined,
): string {
  const state = marginal.states[stateIndex] ?? "";
  const p = marginal.posterior[stateIndex] ?? 0;
  const delta = marginal.delta[stateIndex] ?? 0;
  const active = selectedState === state;
  const indicator = arrow(delta);
  return `
    <div class="state-row">
      <button class="evidence-toggle${active ? " active" : ""}"
              data-node="${escapeHtml(node.id)}" data-state="${escapeHtml(state)}"
              title="toggle evidence ${escapeHtml(node.id)}=${escapeHtml(state)}">
        ${escapeHtml(state)}
      </button>
      <div class="bar-track">
        <div class="bar-fill" style="width:${percentWidth(p)}"></div>
      </div>
      <span class="prob">${prob3(p)}</span>
      <span class="delta ${indicator === "↑" ? "up" : indicator === "↓" ? "down" : "flat"}">
        ${indicator} ${signedDelta(delta)}
      </span>
    </div>`;
}

export function renderNodeCard(
  node: NodeDoc,
  marginal: MarginalDoc | undefined,
  selectedState: string | undefined,
): string {
  const rows = marginal
    ? marginal.states.map((_, i) => renderStateRow(node, marginal, i, selectedState)).join("")
    : `<div class="state-row muted">loading…</div>`;
  const parents = node.parents.length
    ? `<div class="parents">← ${node.parents.map(escapeHtml).join(", ")}</div>`
    : "";
  const observed = marginal?.observed ? " observed" : "";
  return `
    <section class="node-card${observed}" data-card="${escapeHtml(node.id)}">
      <header>
        <h2>${escapeHtml(node.display_name)}</h2>
        <code>${escapeHtml(node.id)}</code>
      </header>
      ${parents}
      ${rows}
    </section>`;
}

export function renderCards(
  model: ModelDoc,
  marginals: Map<string, MarginalDoc>,
  evidence: Record<string, string>,
): string {
  return model.nodes
    .map((node) => renderNodeCard(node, marginals.get(node.id), evidence[node.id]))
    .join("\n");
}

export function renderErrorBanner(message: string, retryable = true): string {
  const retry = retryable
    ? `<button class="retry" data-action="retry">retry</button>`
    : "";
  return `<div class="banner error">${escapeHtml(message)} ${retry}</div>`;
}

export function renderEvidenceError(message: string): string {
  return `<div class="banner inline-error">${escapeHtml(message)}
    <span class="hint">evidence selection kept; adjust it to continue</span></div>`;
}

export function renderEvidenceSummary(evidence: Record<string, string>): string {
  const entries = Object.entries(evidence);
  if (entries.length === 0) {
    return `<span class="muted">no evidence (showing priors)</span>`;
  }
  const chips = entries
    .map(
      ([node, state]) =>
        `<span class="chip">${escapeHtml(node)}=${escapeHtml(state)}</span>`,
    )
    .join(" ");
  return `${chips} <button class="clear-all" data-action="clear">clear all</button>`;
}

function renderAssertionRow(assertion: AssertionDoc): string {
  const verdict = assertion.verdict;
  const badge = `<span class="verdict ${verdict}">${verdict}</span>`;
  const label = escapeHtml(assertion.label);
  if (verdict === "pass") {
    return `<li class="assertion pass">${badge} <code>${label}</code></li>`;
  }
  const values = Object.entries(assertion.values)
    .map(([key, value]) => `<dt>${escapeHtml(key)}</dt><dd>${escapeHtml(JSON.stringify(value))}</dd>`)
    .join("");
  return `
    <li class="assertion ${verdict}">
      <details>
        <summary>${badge} <code>${label}</code></summary>
        <p>${escapeHtml(assertion.detail)}</p>
        <dl>${values}</dl>
      </details>
    </li>`;
}

export function renderAssertionPanel(check: CheckDoc | null): string {
  if (check === null) {
    return "";
  }
  const rows = check.assertions.map(renderAssertionRow).join("\n");
  const { pass, fail, error } = check.summary;
  return `
    <aside class="assertion-panel">
      <h2>behaviour checks</h2>
      <p class="summary">${pass} pass / ${fail} fail / ${error} error</p>
      <ul>${rows}</ul>
    </aside>`;
}
