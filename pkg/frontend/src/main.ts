// Browser entry point. Wires the API client to the render functions and
// keeps the queue in sync after every reviewer action.

import { ApiClient, ApiError } from "./api.js";
import { sortQueue, toReviewItem } from "./model.js";
import {
  renderAuditTrail,
  renderDetail,
  renderError,
  renderGradeView,
  renderQueue,
} from "./render.js";
import { validateOverride } from "./validate.js";
import type { ReviewItem } from "./types.js";

const REVIEWER_ID = "reviewer-ui";

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node;
}

function describe(err: unknown): string {
  if (err instanceof ApiError) return err.detail;
  return err instanceof Error ? err.message : String(err);
}

export function startApp(client = new ApiClient()): void {
  const queuePane = el("queue");
  const detailPane = el("detail");
  const auditPane = el("audit");
  const items = new Map<string, ReviewItem>();
  let selected: string | null = null;

  async function refreshQueue(): Promise<void> {
    try {
      const wire = sortQueue(await client.queue());
      items.clear();
      const resolved = await Promise.all(wire.map((w) => toReviewItem(w, client)));
      for (const item of resolved) items.set(item.response_id, item);
      queuePane.innerHTML = renderQueue(resolved);
      if (selected && !items.has(selected)) {
        // The selected response cleared review; show its final grade.
        await showGrade(selected);
        selected = null;
      }
    } catch (err) {
      queuePane.innerHTML = renderError(describe(err));
    }
  }

  async function showGrade(responseId: string): Promise<void> {
    try {
      const view = await client.grade(responseId);
      detailPane.innerHTML = renderGradeView(view);
      auditPane.innerHTML = renderAuditTrail(await client.auditRecords(responseId));
    } catch (err) {
      detailPane.innerHTML = renderError(describe(err));
    }
  }

  async function showDetail(responseId: string): Promise<void> {
    const item = items.get(responseId);
    if (!item) return;
    selected = responseId;
    detailPane.innerHTML =
      renderDetail(item) +
      `<form id="override-form">
<input name="score" type="number" step="0.5" placeholder="score">
<input name="reason" type="text" placeholder="reason">
<button type="submit">Override</button>
<p id="override-errors" class="form-errors"></p>
</form>`;
    auditPane.innerHTML = renderAuditTrail(await client.auditRecords(responseId));

    const form = el("override-form") as HTMLFormElement;
    form.addEventListener("submit", async (event) => {
      event.preventDefault();
      const data = new FormData(form);
      const draft = {
        score: Number(data.get("score")),
        reason: String(data.get("reason") ?? ""),
        maxMarks: item.max_marks,
      };
      const verdict = validateOverride(draft);
      if (!verdict.ok) {
        el("override-errors").textContent = verdict.errors.join("; ");
        return;
      }
      try {
        await client.override(responseId, draft.score, draft.reason, REVIEWER_ID);
        await refreshQueue();
        await showGrade(responseId);
      } catch (err) {
        el("override-errors").textContent = describe(err);
      }
    });
  }

  queuePane.addEventListener("click", (event) => {
    const row = (event.target as HTMLElement).closest<HTMLElement>("[data-response-id]");
    if (row?.dataset.responseId) void showDetail(row.dataset.responseId);
  });
  queuePane.addEventListener("click", (event) => {
    const retry = (event.target as HTMLElement).closest('[data-action="retry"]');
    if (retry) void refreshQueue();
  });

  void refreshQueue();
}

// Auto-start only in a real browser; tests import the pure modules directly.
if (typeof document !== "undefined" && document.getElementById("queue")) {
  startApp();
}
