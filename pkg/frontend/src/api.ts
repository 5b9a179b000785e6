// Thin typed client over the grading service's HTTP endpoints.
//
// The fetch function is injectable so tests can run without a server and
// the e2e harness can point at a live one.

import type {
  AuditRecordWire,
  AuditVerifyWire,
  ChunkWire,
  GradeViewWire,
  QueueItemWire,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  readonly status: number;
  /** The server's `detail` string, verbatim, so reviewers see the real reason. */
  readonly detail: string;

  constructor(status: number, detail: string) {
    super(`HTTP ${status}: ${detail}`);
    this.name = "ApiError";
    this.status = status;
    this.detail = detail;
  }
}

async function errorDetail(resp: Response): Promise<string> {
  const text = await resp.text();
  try {
    const parsed = JSON.parse(text);
    if (parsed && typeof parsed.detail === "string") return parsed.detail;
  } catch {
    // not JSON; fall through to the raw body
  }
  return text || resp.statusText;
}

export class ApiClient {
  private readonly base: string;
  private readonly fetchFn: FetchLike;

  constructor(base = "http://127.0.0.1:8000", fetchFn: FetchLike = fetch) {
    this.base = base.replace(/\/$/, "");
    this.fetchFn = fetchFn;
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchFn(this.base + path, init);
    if (!resp.ok) throw new ApiError(resp.status, await errorDetail(resp));
    return (await resp.json()) as T;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  async queue(): Promise<QueueItemWire[]> {
    const body = await this.request<{ items: QueueItemWire[] }>("/review/queue");
    return body.items;
  }

  grade(responseId: string): Promise<GradeViewWire> {
    return this.request<GradeViewWire>(`/grades/${encodeURIComponent(responseId)}`);
  }

  chunk(chunkId: string): Promise<ChunkWire> {
    return this.request<ChunkWire>(`/chunks/${encodeURIComponent(chunkId)}`);
  }

  auditVerify(): Promise<AuditVerifyWire> {
    return this.request<AuditVerifyWire>("/audit/verify");
  }

  async auditRecords(responseId?: string): Promise<AuditRecordWire[]> {
    const suffix =
      responseId === undefined ? "" : `?response_id=${encodeURIComponent(responseId)}`;
    const body = await this.request<{ records: AuditRecordWire[] }>(
      "/audit/records" + suffix,
    );
    return body.records;
  }

  submitResponse(body: {
    pseudonym: string;
    question_id: string;
    transcript: string;
    response_id?: string;
    transcript_confidence?: number;
  }): Promise<{ response_id: string }> {
    return this.post("/responses", body);
  }

  override(
    responseId: string,
    score: number,
    reason: string,
    reviewerId: string,
  ): Promise<{ response_id: string; score: number; previously_overridden: boolean }> {
    return this.post(`/review/${encodeURIComponent(responseId)}/override`, {
      score,
      reason,
      reviewer_id: reviewerId,
    });
  }

  appeal(
    responseId: string,
    reason = "",
    actor = "STUDENT",
  ): Promise<{ response_id: string; appeal: string }> {
    return this.post(`/appeals/${encodeURIComponent(responseId)}`, { reason, actor });
  }

  resolveAppeal(
    responseId: string,
    reviewerId: string,
    note = "",
  ): Promise<{ response_id: string; appeal: string }> {
    return this.post(`/appeals/${encodeURIComponent(responseId)}/resolve`, {
      reviewer_id: reviewerId,
      note,
    });
  }
}
