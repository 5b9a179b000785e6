// End-to-end pass against a live grading service.
//
// Starts the real HTTP service on a scratch corpus, drives it through the
// same client modules the browser uses, and checks the full review cycle:
// queue ordering, client-side validation stopping bad overrides before any
// request leaves, a real override landing, and the audit trail recording it.
//
// Run with: npm run e2e

import { spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, rmSync, writeFileSync } from "node:fs";
import { createServer } from "node:net";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { ApiClient, type FetchLike } from "../src/api.js";
import { sortQueue } from "../src/model.js";
import { renderGradeView, renderQueue } from "../src/render.js";
import { toReviewItem } from "../src/model.js";
import { validateOverride } from "../src/validate.js";

const REFERENCE_TEXT = "the delta floods every monsoon and silt renews the fields";

function ndjson(rows: object[]): string {
  return rows.map((r) => JSON.stringify(r)).join("\n") + "\n";
}

function writeCorpus(dir: string): { references: string; facts: string; questions: string } {
  const references = join(dir, "references.ndjson");
  const facts = join(dir, "facts.ndjson");
  const questions = join(dir, "questions.ndjson");
  writeFileSync(
    references,
    ndjson([
      { chunk_id: "c-q1", question_id: "q1", text: REFERENCE_TEXT, max_marks: 5.0 },
    ]),
  );
  writeFileSync(
    facts,
    ndjson([
      { fact_id: "f1", topic: "floods", text: "monsoon rains flood the delta each year" },
      { fact_id: "f2", topic: "floods", text: "silt left by floods renews the topsoil" },
      { fact_id: "f3", topic: "floods", text: "farmers time planting around the flood cycle" },
    ]),
  );
  writeFileSync(
    questions,
    ndjson([{ question_id: "q1", question_text: "explain how monsoon floods shape delta farming" }]),
  );
  return { references, facts, questions };
}

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const probe = createServer();
    probe.once("error", reject);
    probe.listen(0, "127.0.0.1", () => {
      const address = probe.address();
      if (address === null || typeof address === "string") {
        reject(new Error("no port assigned"));
        return;
      }
      probe.close(() => resolve(address.port));
    });
  });
}

async function waitForService(base: string, child: ChildProcess): Promise<void> {
  const deadline = Date.now() + 30_000;
  while (Date.now() < deadline) {
    if (child.exitCode !== null) {
      throw new Error(`service exited early with code ${child.exitCode}`);
    }
    try {
      const resp = await fetch(base + "/review/queue");
      if (resp.ok) return;
    } catch {
      // not listening yet
    }
    await new Promise((r) => setTimeout(r, 200));
  }
  throw new Error("service never came up");
}

let failures = 0;

function check(label: string, ok: boolean, detail = ""): void {
  if (ok) {
    console.log(`PASS ${label}`);
  } else {
    failures += 1;
    console.log(`FAIL ${label}${detail ? `: ${detail}` : ""}`);
  }
}

async function main(): Promise<void> {
  const dir = mkdtempSync(join(tmpdir(), "review-ui-e2e-"));
  const paths = writeCorpus(dir);
  const port = await freePort();
  const base = `http://127.0.0.1:${port}`;

  const child = spawn(
    "python3",
    [
      "-m",
      "gradekit.cli",
      "serve",
      "--references",
      paths.references,
      "--facts",
      paths.facts,
      "--questions",
      paths.questions,
      "--port",
      String(port),
    ],
    { stdio: ["ignore", "ignore", "inherit"] },
  );

  const cleanup = () => {
    child.kill();
    rmSync(dir, { recursive: true, force: true });
  };

  try {
    await waitForService(base, child);

    // Count outbound requests so validation failures can be shown to make none.
    let requestCount = 0;
    const countingFetch: FetchLike = (url, init) => {
      requestCount += 1;
      return fetch(url, init);
    };
    const client = new ApiClient(base, countingFetch);

    // One clean submission, one that the transcriber was unsure about, and
    // one that the student appeals. Only the latter two belong in the queue.
    const clean = await client.submitResponse({
      pseudonym: "scr-0001",
      question_id: "q1",
      transcript: REFERENCE_TEXT,
    });
    const shaky = await client.submitResponse({
      pseudonym: "scr-0002",
      question_id: "q1",
      transcript: "floods happen and then farming",
      transcript_confidence: 0.4,
    });
    const appealed = await client.submitResponse({
      pseudonym: "scr-0003",
      question_id: "q1",
      transcript: REFERENCE_TEXT,
    });
    await client.appeal(appealed.response_id, "score feels wrong");

    const queue = await client.queue();
    check(
      "queue holds only the flagged and appealed submissions",
      queue.length === 2 && !queue.some((i) => i.response_id === clean.response_id),
      `got ${queue.map((i) => i.response_id).join(", ")}`,
    );

    const ordered = sortQueue(queue);
    check(
      "appealed submission sorts ahead of the flagged one",
      ordered[0]?.response_id === appealed.response_id &&
        ordered[1]?.response_id === shaky.response_id,
      `got ${ordered.map((i) => i.response_id).join(", ")}`,
    );

    const resolved = await Promise.all(ordered.map((i) => toReviewItem(i, client)));
    const queueHtml = renderQueue(resolved);
    check(
      "queue renders pseudonyms for both items",
      queueHtml.includes("scr-0002") && queueHtml.includes("scr-0003"),
    );

    const target = resolved.find((i) => i.response_id === shaky.response_id);
    if (!target) throw new Error("flagged item missing from queue");

    // Client-side validation must stop bad drafts before any request is made.
    const before = requestCount;
    const blankReason = validateOverride({ score: 2.0, reason: "  ", maxMarks: target.max_marks });
    const overMax = validateOverride({
      score: target.max_marks + 1,
      reason: "bump",
      maxMarks: target.max_marks,
    });
    check("blank-reason override rejected client-side", !blankReason.ok);
    check("over-max override rejected client-side", !overMax.ok);
    check(
      "rejected drafts made no HTTP request",
      requestCount === before,
      `count went ${before} -> ${requestCount}`,
    );

    await client.override(target.response_id, 2.0, "transcript too thin for the marks", "rev-1");

    const after = await client.queue();
    check(
      "overridden response left the queue",
      !after.some((i) => i.response_id === target.response_id),
    );

    const view = await client.grade(target.response_id);
    check(
      "grade view shows the override and keeps the original score",
      view.overridden && view.grade.score === 2.0 && view.original_score !== 2.0,
      JSON.stringify({ overridden: view.overridden, score: view.grade.score, original: view.original_score }),
    );
    const gradeHtml = renderGradeView(view);
    check(
      "rendered grade view surfaces both scores",
      gradeHtml.includes("Score: 2 / 5") && gradeHtml.includes("Original machine score"),
    );

    const trail = await client.auditRecords(target.response_id);
    check(
      "audit trail for the response records the override",
      trail.some((r) => r.action === "OVERRIDDEN" && r.actor === "rev-1"),
      trail.map((r) => r.action).join(", "),
    );

    const verify = await client.auditVerify();
    check("audit chain verifies after the whole session", verify.status === "OK");
  } finally {
    cleanup();
  }

  if (failures > 0) {
    console.error(`${failures} e2e check(s) failed`);
    process.exit(1);
  }
  console.log("e2e: all checks passed");
}

main().catch((err) => {
  console.error(err);
  process.exit(1);
});
