/** Wire types mirroring the session service's JSON bodies. */

export type SessionState =
  | "created"
  | "questioned"
  | "planned"
  | "rendered"
  | "refining"
  | "done";

export interface VersionInfo {
  version: number;
  code_id: string;
  parent: string | null;
  origin: string;
  dialect_id: string;
  status: string;
  code_blob: string;
  image_blob: string | null;
}

export interface QAPair {
  question_id: number;
  question: string;
  answer: string;
}

export interface PlanView {
  intent: { intent_text: string; label: string };
  qa_pairs: QAPair[];
}

export interface CritiqueView {
  aspect: string;
  score: number;
  feedback: string;
  satisfied: boolean;
  version: number;
}

export interface SessionView {
  session_id: string;
  state: SessionState;
  bundle_refs: string[];
  intent_text: string;
  intent_label: string | null;
  questions: string[];
  plan: PlanView | null;
  versions: VersionInfo[];
  critiques: CritiqueView[];
  ratings: Array<{ ratings: Record<string, number> }>;
  feedback_notes: string[];
  errors: string[];
  last_ordinal: number;
}

export interface ApiError {
  code: string;
  message: string;
  event_ordinal: number;
}

/** Ratings the feedback panel collects; "correctness" maps to the
 * faithfulness aspect service-side. */
export interface Ratings {
  completeness?: number;
  correctness?: number;
  layout?: number;
}
