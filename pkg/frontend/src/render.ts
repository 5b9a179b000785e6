// HTML rendering for the review queue and the grade detail panel.
//
// Everything goes through string templates so the output can be asserted on
// directly in tests. Two rules hold throughout: every interpolated value is
// escaped, and only whitelisted fields of a wire object are ever rendered.
// The second rule is what keeps student identity out of the DOM even if the
// server starts sending extra fields.

import { categoryConsistent, binCategory } from "./model.js";
import type { AuditRecordWire, GradeViewWire, ReviewItem } from "./types.js";

export function escapeHtml(value: unknown): string {
  return String(value)
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

function badge(text: string, kind: string): string {
  return `<span class="badge badge-${kind}">${escapeHtml(text)}</span>`;
}

function queueBadges(item: ReviewItem): string {
  const parts: string[] = [];
  if (item.appeal === "OPEN") parts.push(badge("APPEAL", "appeal"));
  if (item.confidence_flag) parts.push(badge("LOW CONFIDENCE", "flag"));
  if (item.stage === "UNRESOLVED") parts.push(badge("UNRESOLVED", "unresolved"));
  return parts.join(" ");
}

function scoreCell(item: ReviewItem): string {
  if (item.score === null) return `<td class="score">&ndash;</td>`;
  return `<td class="score">${escapeHtml(item.score)} / ${escapeHtml(item.max_marks)}</td>`;
}

/** One row per queue item; pseudonym is the only identity field shown. */
export function renderQueue(items: readonly ReviewItem[]): string {
  if (items.length === 0) {
    return `<p class="empty">Review queue is empty. Nothing is flagged or appealed.</p>`;
  }
  const rows = items
    .map(
      (item) => `<tr class="queue-row" data-response-id="${escapeHtml(item.response_id)}">
  <td>${escapeHtml(item.pseudonym)}</td>
  <td>${escapeHtml(item.question_id)}</td>
  ${scoreCell(item)}
  <td>${queueBadges(item)}</td>
</tr>`,
    )
    .join("\n");
  return `<table class="queue">
<thead><tr><th>Student</th><th>Question</th><th>Score</th><th>Status</th></tr></thead>
<tbody>
${rows}
</tbody>
</table>`;
}

function rationaleList(heading: string, entries: readonly string[]): string {
  if (entries.length === 0) return "";
  const items = entries.map((e) => `<li>${escapeHtml(e)}</li>`).join("");
  return `<h4>${escapeHtml(heading)}</h4><ul>${items}</ul>`;
}

function citationBlocks(item: ReviewItem): string {
  if (item.evidence.length === 0) {
    return `<p class="no-evidence">No cached evidence was cited for this grade.</p>`;
  }
  return item.evidence
    .map(
      (ev) => `<details class="citation">
<summary>${escapeHtml(ev.id)}</summary>
<blockquote>${escapeHtml(ev.text)}</blockquote>
</details>`,
    )
    .join("\n");
}

/**
 * Full detail panel for one queue item: transcript, machine grade with its
 * rationale, cited evidence inline, and the retrieval similarity. If the
 * wire category disagrees with what the score implies, the recomputed value
 * is shown with a warning instead of the server's.
 */
export function renderDetail(item: ReviewItem): string {
  const header = `<h2>${escapeHtml(item.pseudonym)} &mdash; ${escapeHtml(item.question_id)}</h2>
<p class="question">${escapeHtml(item.question_text)}</p>
<blockquote class="transcript">${escapeHtml(item.transcript)}</blockquote>`;

  if (item.score === null || item.category === null || item.rationale === null) {
    return `${header}
<p class="unresolved-note">The grading provider failed on this response. No machine grade exists; assign a score manually.</p>
<p class="similarity">Reference similarity: ${escapeHtml(item.rag1_similarity.toFixed(3))}</p>`;
  }

  let categoryLine: string;
  if (categoryConsistent(item)) {
    categoryLine = `<p class="category">${escapeHtml(item.category)}</p>`;
  } else {
    const recomputed = binCategory(item.score, item.max_marks);
    categoryLine = `<p class="category category-mismatch">${escapeHtml(recomputed)} (server sent ${escapeHtml(item.category)}, which does not match the score)</p>`;
  }

  return `${header}
<div class="grade">
<p class="score-line">Score: ${escapeHtml(item.score)} / ${escapeHtml(item.max_marks)}</p>
${categoryLine}
<p class="similarity">Reference similarity: ${escapeHtml(item.rag1_similarity.toFixed(3))} (stage ${escapeHtml(item.stage)})</p>
${rationaleList("Correct points", item.rationale.correct_points)}
${rationaleList("Omissions", item.rationale.omissions)}
${rationaleList("Improvements", item.rationale.improvements)}
</div>
<div class="evidence">
<h3>Cited evidence</h3>
${citationBlocks(item)}
</div>`;
}

/** Post-override view: current grade plus the preserved original score. */
export function renderGradeView(view: GradeViewWire): string {
  const lines = [
    `<h2>${escapeHtml(view.pseudonym)} &mdash; ${escapeHtml(view.question_id)}</h2>`,
    `<p class="score-line">Score: ${escapeHtml(view.grade.score)} / ${escapeHtml(view.grade.max_marks)} (${escapeHtml(view.grade.category)})</p>`,
  ];
  if (view.overridden) {
    lines.push(
      `<p class="override-note">Overridden by a reviewer. Original machine score: ${escapeHtml(view.original_score)}.</p>`,
    );
    if (view.override_reason !== null) {
      lines.push(`<p class="override-reason">Reason: ${escapeHtml(view.override_reason)}</p>`);
    }
  }
  if (view.appeal !== null) {
    lines.push(`<p class="appeal-state">Appeal: ${escapeHtml(view.appeal)}</p>`);
  }
  return lines.join("\n");
}

export function renderAuditTrail(records: readonly AuditRecordWire[]): string {
  if (records.length === 0) {
    return `<p class="empty">No audit records for this response.</p>`;
  }
  const rows = records
    .map(
      (r) => `<tr>
  <td>${escapeHtml(r.sequence_no)}</td>
  <td>${escapeHtml(r.action)}</td>
  <td>${escapeHtml(r.actor)}</td>
  <td>${r.score === null ? "&ndash;" : escapeHtml(r.score)}</td>
  <td class="hash">${escapeHtml(r.hash.slice(0, 12))}&hellip;</td>
</tr>`,
    )
    .join("\n");
  return `<table class="audit">
<thead><tr><th>#</th><th>Action</th><th>Actor</th><th>Score</th><th>Hash</th></tr></thead>
<tbody>
${rows}
</tbody>
</table>`;
}

export function renderError(message: string): string {
  return `<div class="error">
<p>${escapeHtml(message)}</p>
<button class="retry" data-action="retry">Retry</button>
</div>`;
}
