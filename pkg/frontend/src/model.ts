// Client-side view logic: queue ordering, category binning, citation resolution.
//
// The binning rule is recomputed here rather than trusted from the wire, so a
// drifted or tampered payload shows up as a visible mismatch in the UI.

import type { ApiClient } from "./api.js";
import type { Category, QueueItemWire, ReviewItem } from "./types.js";

const CATEGORIES: readonly Category[] = ["FAIL", "AVERAGE", "GOOD", "EXCELLENT"];

// Lower-inclusive cut points on score/max_marks.
const GOOD_FLOOR = 0.8;
const AVERAGE_FLOOR = 0.6;
const FAIL_CEILING = 0.4;

export function binCategory(score: number, maxMarks: number): Category {
  const ratio = maxMarks > 0 ? score / maxMarks : 0.0;
  if (ratio >= GOOD_FLOOR) return "EXCELLENT";
  if (ratio >= AVERAGE_FLOOR) return "GOOD";
  if (ratio >= FAIL_CEILING) return "AVERAGE";
  return "FAIL";
}

export function isCategory(value: unknown): value is Category {
  return typeof value === "string" && (CATEGORIES as readonly string[]).includes(value);
}

/**
 * True when the wire category matches what the score implies. Unresolved
 * items (no score yet) are vacuously consistent.
 */
export function categoryConsistent(item: {
  score: number | null;
  category: string | null;
  max_marks: number;
}): boolean {
  if (item.score === null) return item.category === null;
  return item.category === binCategory(item.score, item.max_marks);
}

function queueBucket(item: QueueItemWire): number {
  if (item.appeal === "OPEN") return 0;
  if (item.confidence_flag) return 1;
  return 2;
}

/**
 * Order the review queue the way the service does: open appeals first, then
 * confidence-flagged items, then the rest; ties break on submission order.
 * Sorting client-side keeps the display stable even if the server changes
 * its ordering or the items were fetched in pages.
 */
export function sortQueue(items: readonly QueueItemWire[]): QueueItemWire[] {
  return [...items].sort((a, b) => {
    const byBucket = queueBucket(a) - queueBucket(b);
    if (byBucket !== 0) return byBucket;
    return a.submitted_at - b.submitted_at;
  });
}

/**
 * Attach the text of every cited chunk to a queue item. An id the service
 * cannot resolve is an error, not a silent gap: a citation that points
 * nowhere means the evidence trail is broken.
 */
export async function toReviewItem(
  item: QueueItemWire,
  client: ApiClient,
): Promise<ReviewItem> {
  const evidence = await Promise.all(
    item.evidence_citations.map(async (id) => {
      const chunk = await client.chunk(id);
      return { id, text: chunk.text };
    }),
  );
  return { ...item, evidence };
}
