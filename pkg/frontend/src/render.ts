// Pure HTML renderers over the view models: template strings in, markup
// out. Keeping these DOM-free makes them directly testable.

import type {
  ActionItemCard,
  CoverageCell,
  EvidenceRow,
  PostureCard,
  RegistryReviewCard,
  ScanStatusRow,
  TrustCenterPage,
} from "./viewmodels.js";
import { SUBMITTABLE_TIERS } from "./viewmodels.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderPostureCard(card: PostureCard | null): string {
  if (!card) {
    return `<div class="card posture" id="posture-card">
      <div class="stat-label">Posture</div>
      <div class="stat-value">–</div>
      <div class="stat-sub">no evidence yet, launch a scan</div>
    </div>`;
  }
  return `<div class="card posture" id="posture-card" data-score="${card.score}">
    <div class="stat-label">Posture</div>
    <div class="stat-value">${card.score}<span class="out-of">/${card.outOf}</span></div>
    <div class="badge badge-${card.label.toLowerCase().replace(/[^a-z]+/g, "-")}">${escapeHtml(card.label)}</div>
    <div class="stat-sub">${escapeHtml(card.severityLine)}</div>
    <div class="stat-sub">${escapeHtml(card.projectedLine)}</div>
    <div class="stat-sub faint">${card.integrations} integrations · weights: ${escapeHtml(card.provenance)}</div>
  </div>`;
}

export function renderScanRows(rows: ScanStatusRow[]): string {
  if (rows.length === 0) {
    return `<p class="empty">No scan jobs yet.</p>`;
  }
  const body = rows
    .map(
      (r) => `<tr data-job="${escapeHtml(r.jobId)}">
        <td class="mono">${escapeHtml(r.jobId)}</td>
        <td>${escapeHtml(r.label)}${r.isRecheck ? ' <span class="badge badge-recheck">recheck</span>' : ""}</td>
        <td><span class="state state-${r.state}">${r.state}</span></td>
      </tr>`,
    )
    .join("\n");
  return `<table class="scan-table"><thead><tr><th>Job</th><th>Probe</th><th>State</th></tr></thead><tbody>${body}</tbody></table>`;
}

export function renderActionItems(cards: ActionItemCard[]): string {
  if (cards.length === 0) {
    return `<p class="empty">Action center is clear.</p>`;
  }
  return cards
    .map(
      (c) => `<div class="card item sev-${c.severity.toLowerCase()}" data-item="${escapeHtml(c.itemId)}">
      <div class="item-head">
        <span class="badge badge-${c.severity.toLowerCase()}">${escapeHtml(c.severity)}</span>
        <span class="mono">${escapeHtml(c.controlId)}</span>
        <span class="req">${escapeHtml(c.requirementId)}</span>
      </div>
      <p>${escapeHtml(c.description)}</p>
      <div class="item-foot">
        <span class="owner">owner: ${escapeHtml(c.owner)}</span>
        <button class="close-item" data-item-id="${escapeHtml(c.itemId)}">Close &amp; re-check</button>
      </div>
    </div>`,
    )
    .join("\n");
}

export function renderReviewQueue(cards: RegistryReviewCard[]): string {
  if (cards.length === 0) {
    return `<p class="empty">No systems awaiting review.</p>`;
  }
  const tierOptions = [
    `<option value="Unclassified">select tier…</option>`,
    ...SUBMITTABLE_TIERS.map((t) => `<option value="${t}">${t}</option>`),
  ].join("");
  return cards
    .map(
      (c) => `<div class="card review" data-system="${escapeHtml(c.systemId)}">
      <div class="item-head">
        <strong>${escapeHtml(c.name)}</strong>
        <span class="badge badge-pending">pending review</span>
      </div>
      <div class="stat-sub">${escapeHtml(c.modelType)} · ${escapeHtml(c.discoverySource)}</div>
      <div class="review-form">
        <input class="owner-input" data-system-id="${escapeHtml(c.systemId)}" placeholder="owner user id">
        <select class="tier-select" data-system-id="${escapeHtml(c.systemId)}">${tierOptions}</select>
        <button class="submit-review" data-system-id="${escapeHtml(c.systemId)}" disabled>Register</button>
      </div>
      <p class="notice" data-notice="${escapeHtml(c.systemId)}"></p>
    </div>`,
    )
    .join("\n");
}

export function renderCoverage(cells: CoverageCell[]): string {
  if (cells.length === 0) {
    return `<p class="empty">No clauses in this framework.</p>`;
  }
  return `<div class="coverage-grid">${cells
    .map(
      (c) =>
        `<span class="cov cov-${c.state}" title="${c.state}">${escapeHtml(c.clause)}</span>`,
    )
    .join("")}</div>`;
}

export function renderEvidenceRows(rows: EvidenceRow[]): string {
  if (rows.length === 0) {
    return `<p class="empty">Ledger is empty.</p>`;
  }
  const body = rows
    .map(
      (r) => `<tr>
      <td>${escapeHtml(r.integration)}</td>
      <td>${escapeHtml(r.frameworkTag)}</td>
      <td><span class="state state-${r.status.toLowerCase()}">${escapeHtml(r.status)}</span></td>
      <td class="mono">${escapeHtml(r.countsLine)}</td>
      <td class="mono">${escapeHtml(r.watermark)}</td>
    </tr>`,
    )
    .join("\n");
  return `<table class="scan-table"><thead><tr><th>Integration</th><th>Frameworks</th><th>Status</th><th>C/H/M</th><th>Watermark</th></tr></thead><tbody>${body}</tbody></table>`;
}

export function renderTrustCenter(page: TrustCenterPage): string {
  const rows = page.rows
    .map(
      (r) => `<tr><td>${escapeHtml(r.framework)}</td>
      <td>${r.passed} of ${r.assessed} assessed controls passing</td></tr>`,
    )
    .join("\n");
  return `<div class="trust-center">
    <h2>Trust Center</h2>
    <p>Overall: <strong>${escapeHtml(page.classification)}</strong></p>
    <table class="scan-table"><tbody>${rows}</tbody></table>
    <p class="faint">generated ${escapeHtml(page.generatedAt)}</p>
  </div>`;
}
