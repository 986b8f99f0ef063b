/** Studio controller: every user action round-trips the API and folds
 * the fresh server view into local state. Optimistic UI is limited to
 * drafts; server ordinals always win. */

import { ApiClient, ApiRequestError } from "./api.js";
import {
  initialState,
  latestVersionNumber,
  setRating,
  withSession,
  type StudioState,
  type ViewName,
} from "./state.js";
import type { Ratings, SessionView } from "./types.js";

export class Studio {
  state: StudioState = initialState();

  constructor(
    private readonly api: ApiClient,
    private readonly onChange: (state: StudioState) => void = () => {},
  ) {}

  private update(next: StudioState): void {
    this.state = next;
    this.onChange(next);
  }

  private async guarded(work: () => Promise<StudioState>): Promise<void> {
    this.update({ ...this.state, busy: true, notice: "" });
    try {
      const next = await work();
      this.update({ ...next, busy: false });
    } catch (error) {
      const message =
        error instanceof ApiRequestError
          ? `${error.body.code}: ${error.body.message}`
          : String(error);
      this.update({ ...this.state, busy: false, notice: message });
    }
  }

  private async syncCode(state: StudioState): Promise<StudioState> {
    const version = latestVersionNumber(state);
    const sessionId = state.session?.session_id;
    if (version === null || !sessionId) {
      return state;
    }
    const { source } = await this.api.versionCode(sessionId, version);
    return { ...state, editorBuffer: source, serverSource: source };
  }

  show(view: ViewName): void {
    this.update({ ...this.state, activeView: view });
  }

  setEditorBuffer(source: string): void {
    this.update({ ...this.state, editorBuffer: source });
  }

  setFeedbackDraft(text: string): void {
    this.update({ ...this.state, feedbackDraft: text });
  }

  setAnswersDraft(text: string): void {
    this.update({ ...this.state, answersDraft: text });
  }

  rate(aspect: keyof Ratings, value: number): void {
    this.update(setRating(this.state, aspect, value));
  }

  async start(bundleRefs: string[]): Promise<void> {
    await this.guarded(async () => {
      const session = await this.api.createSession(bundleRefs);
      return withSession(this.state, session);
    });
  }

  async attach(sessionId: string): Promise<void> {
    await this.guarded(async () => {
      const session = await this.api.getSession(sessionId);
      return this.syncCode(withSession(this.state, session));
    });
  }

  /** Page 1: submit the intent; the model's clarification questions
   * come back on the same session view. */
  async submitIntent(intentText: string): Promise<void> {
    const session = this.requireSession();
    await this.guarded(async () => {
      const view = await this.api.submitIntent(session.session_id, intentText);
      return withSession(this.state, view);
    });
  }

  /** Page 1: build the plan, either from the user's comma-separated
   * answers or automatically from the paper. */
  async buildPlan(): Promise<void> {
    const session = this.requireSession();
    await this.guarded(async () => {
      const answers = this.state.answersDraft
        .split(",")
        .map((a) => a.trim())
        .filter(Boolean);
      const pairs =
        answers.length && session.questions.length
          ? session.questions
              .slice(0, answers.length)
              .map((question, i) => ({ question, answer: answers[i] }))
          : undefined;
      const view = await this.api.putPlan(session.session_id, pairs);
      return withSession(this.state, view);
    });
  }

  /** Page 2: render from the plan. */
  async renderDiagram(): Promise<void> {
    const session = this.requireSession();
    await this.guarded(async () => {
      await this.api.render(session.session_id);
      const view = await this.api.pollSession(
        session.session_id,
        (v) => v.versions.length > session.versions.length || v.errors.length > 0,
      );
      const next = await this.syncCode(withSession(this.state, view));
      return { ...next, activeView: "code" as ViewName };
    });
  }

  /** Page 2: execute the edited buffer as a new human-edit version. */
  async runEditedCode(): Promise<void> {
    const session = this.requireSession();
    await this.guarded(async () => {
      const view = await this.api.render(session.session_id, this.state.editorBuffer);
      return this.syncCode(withSession(this.state, view));
    });
  }

  async critique(): Promise<void> {
    const session = this.requireSession();
    await this.guarded(async () => {
      const view = await this.api.critique(session.session_id);
      return withSession(this.state, view);
    });
  }

  /** Page 3: Regenerate — ratings + remark feed the refinement. */
  async regenerate(): Promise<void> {
    const session = this.requireSession();
    await this.guarded(async () => {
      const view = await this.api.sendFeedback(
        session.session_id,
        this.state.pendingRatings,
        this.state.feedbackDraft,
        true,
      );
      const next = await this.syncCode(withSession(this.state, view));
      return { ...next, pendingRatings: {}, feedbackDraft: "" };
    });
  }

  /** Page 3: Save — record ratings/remark and close the session. */
  async save(): Promise<void> {
    const session = this.requireSession();
    await this.guarded(async () => {
      const view = await this.api.sendFeedback(
        session.session_id,
        this.state.pendingRatings,
        this.state.feedbackDraft,
        false,
      );
      return withSession(this.state, view);
    });
  }

  private requireSession(): SessionView {
    if (!this.state.session) {
      throw new Error("no active session");
    }
    return this.state.session;
  }
}
