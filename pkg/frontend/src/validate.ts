// Pre-flight checks for reviewer overrides, mirroring the service's rules so
// obviously bad requests never leave the browser.

export interface OverrideDraft {
  score: number;
  reason: string;
  maxMarks: number;
}

export interface ValidationResult {
  ok: boolean;
  errors: string[];
}

export function validateOverride(draft: OverrideDraft): ValidationResult {
  const errors: string[] = [];
  if (!draft.reason.trim()) {
    errors.push("override requires a reason");
  }
  if (!Number.isFinite(draft.score)) {
    errors.push("score must be a number");
  } else if (draft.score < 0 || draft.score > draft.maxMarks) {
    errors.push(`score must lie in [0, ${draft.maxMarks}]`);
  }
  return { ok: errors.length === 0, errors };
}
