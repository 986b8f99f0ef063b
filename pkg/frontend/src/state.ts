/** Studio state: a mirror of the server session plus local drafts.
 * The only local computation is bookkeeping (dirty flags, drafts);
 * everything authoritative comes from the server view. */

import type { Ratings, SessionView } from "./types.js";

export type ViewName = "intent" | "code" | "feedback";

export interface StudioState {
  session: SessionView | null;
  activeView: ViewName;
  /** local code editor buffer */
  editorBuffer: string;
  /** source as last loaded from the server, to detect divergence */
  serverSource: string;
  pendingRatings: Ratings;
  feedbackDraft: string;
  answersDraft: string;
  busy: boolean;
  notice: string;
}

export function initialState(): StudioState {
  return {
    session: null,
    activeView: "intent",
    editorBuffer: "",
    serverSource: "",
    pendingRatings: {},
    feedbackDraft: "",
    answersDraft: "",
    busy: false,
    notice: "",
  };
}

/** The editor visibly flags a buffer that diverges from the server code. */
export function editorDirty(state: StudioState): boolean {
  return state.editorBuffer !== state.serverSource;
}

export function latestVersionNumber(state: StudioState): number | null {
  const versions = state.session?.versions ?? [];
  return versions.length ? versions[versions.length - 1].version : null;
}

export function versionHistory(state: StudioState): number[] {
  return (state.session?.versions ?? []).map((v) => v.version);
}

export function withSession(state: StudioState, session: SessionView): StudioState {
  return { ...state, session };
}

export function setRating(
  state: StudioState,
  aspect: keyof Ratings,
  value: number,
): StudioState {
  if (!Number.isInteger(value) || value < 1 || value > 5) {
    return { ...state, notice: `ratings are whole numbers from 1 to 5` };
  }
  return {
    ...state,
    pendingRatings: { ...state.pendingRatings, [aspect]: value },
    notice: "",
  };
}
