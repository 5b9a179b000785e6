import { describe, expect, it } from "vitest";

import { binCategory, categoryConsistent, sortQueue } from "../model.js";
import type { QueueItemWire } from "../types.js";

function item(overrides: Partial<QueueItemWire>): QueueItemWire {
  return {
    response_id: "resp-000000",
    pseudonym: "scr-0001",
    question_id: "q-0001",
    question_text: "explain the thing",
    transcript: "the thing works because",
    max_marks: 5.0,
    appeal: null,
    submitted_at: 1,
    rag1_similarity: 0.42,
    score: 3.0,
    category: "GOOD",
    rationale: { correct_points: [], omissions: [], improvements: [] },
    evidence_citations: [],
    confidence_flag: false,
    stage: "CACHE_AUGMENTED",
    ...overrides,
  };
}

describe("sortQueue", () => {
  it("puts open appeals before flags before the rest", () => {
    const plain = item({ response_id: "plain", submitted_at: 1 });
    const flagged = item({ response_id: "flagged", submitted_at: 2, confidence_flag: true });
    const appealed = item({ response_id: "appealed", submitted_at: 3, appeal: "OPEN" });
    const sorted = sortQueue([plain, flagged, appealed]);
    expect(sorted.map((i) => i.response_id)).toEqual(["appealed", "flagged", "plain"]);
  });

  it("breaks ties by submission order within a bucket", () => {
    const late = item({ response_id: "late", submitted_at: 9, confidence_flag: true });
    const early = item({ response_id: "early", submitted_at: 2, confidence_flag: true });
    const sorted = sortQueue([late, early]);
    expect(sorted.map((i) => i.response_id)).toEqual(["early", "late"]);
  });

  it("a resolved appeal does not jump the queue", () => {
    const resolved = item({ response_id: "resolved", submitted_at: 5, appeal: "RESOLVED" });
    const flagged = item({ response_id: "flagged", submitted_at: 6, confidence_flag: true });
    const sorted = sortQueue([resolved, flagged]);
    expect(sorted.map((i) => i.response_id)).toEqual(["flagged", "resolved"]);
  });

  it("does not mutate its input", () => {
    const a = item({ response_id: "a", appeal: "OPEN" });
    const b = item({ response_id: "b" });
    const input = [b, a];
    sortQueue(input);
    expect(input.map((i) => i.response_id)).toEqual(["b", "a"]);
  });
});

describe("binCategory", () => {
  it("bins the four bands with lower-inclusive cut points", () => {
    expect(binCategory(0.0, 5.0)).toBe("FAIL");
    expect(binCategory(1.5, 5.0)).toBe("FAIL"); // 0.30
    expect(binCategory(2.0, 5.0)).toBe("AVERAGE"); // exactly 0.40
    expect(binCategory(2.5, 5.0)).toBe("AVERAGE");
    expect(binCategory(3.0, 5.0)).toBe("GOOD"); // exactly 0.60
    expect(binCategory(3.5, 5.0)).toBe("GOOD");
    expect(binCategory(4.0, 5.0)).toBe("EXCELLENT"); // exactly 0.80
    expect(binCategory(5.0, 5.0)).toBe("EXCELLENT");
  });

  it("treats zero max marks as a failing ratio rather than dividing", () => {
    expect(binCategory(0.0, 0.0)).toBe("FAIL");
  });
});

describe("categoryConsistent", () => {
  it("accepts a matching wire category", () => {
    expect(categoryConsistent(item({ score: 3.0, category: "GOOD" }))).toBe(true);
  });

  it("rejects a drifted wire category", () => {
    expect(categoryConsistent(item({ score: 3.0, category: "EXCELLENT" }))).toBe(false);
  });

  it("ungraded items are consistent only when category is also null", () => {
    expect(categoryConsistent(item({ score: null, category: null }))).toBe(true);
    expect(categoryConsistent(item({ score: null, category: "FAIL" }))).toBe(false);
  });
});
