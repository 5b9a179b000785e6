// Wire shapes, mirroring the grading service's JSON responses.

export type Category = "FAIL" | "AVERAGE" | "GOOD" | "EXCELLENT";

export type AppealState = "OPEN" | "RESOLVED" | null;

export interface Rationale {
  correct_points: string[];
  omissions: string[];
  improvements: string[];
}

export interface QueueItemWire {
  response_id: string;
  pseudonym: string;
  question_id: string;
  question_text: string;
  transcript: string;
  max_marks: number;
  appeal: AppealState;
  submitted_at: number;
  rag1_similarity: number;
  score: number | null;
  category: string | null;
  rationale: Rationale | null;
  evidence_citations: string[];
  confidence_flag: boolean;
  stage: string;
}

export interface GradeWire {
  score: number;
  max_marks: number;
  category: string;
  rationale: Rationale;
  evidence_citations: string[];
  confidence_flag: boolean;
  stage: string;
}

export interface GradeViewWire {
  response_id: string;
  pseudonym: string;
  question_id: string;
  grade: GradeWire;
  overridden: boolean;
  original_score: number;
  override_reason: string | null;
  appeal: AppealState;
}

export interface ChunkWire {
  id: string;
  kind: "reference" | "fact";
  text: string;
  question_id?: string;
  topic?: string;
}

export interface AuditRecordWire {
  sequence_no: number;
  hash: string;
  response_id: string;
  action: string;
  actor: string;
  score: number | null;
  stage: string;
  request_hash: string;
  evidence_citations: string[];
}

export interface AuditVerifyWire {
  status: "OK" | "FAIL";
  records?: number;
  head?: string;
  first_bad?: number;
}

// A queue entry after citation texts have been resolved through the API.
export interface ReviewItem extends QueueItemWire {
  evidence: { id: string; text: string }[];
}
