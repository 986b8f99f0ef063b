/** Typed client for the session HTTP API. Every state change in the
 * studio round-trips through here; no pipeline logic runs locally. */

import type { ApiError, Ratings, SessionView } from "./types.js";

export type FetchLike = (
  input: string,
  init?: RequestInit,
) => Promise<Response>;

export class ApiRequestError extends Error {
  constructor(
    readonly status: number,
    readonly body: ApiError,
  ) {
    super(`${body.code}: ${body.message}`);
  }
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method,
      headers: body === undefined ? {} : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload = await response.json();
    if (!response.ok) {
      throw new ApiRequestError(response.status, payload as ApiError);
    }
    return payload as T;
  }

  createSession(bundleRefs: string[], intentText = ""): Promise<SessionView> {
    return this.request("POST", "/sessions", {
      bundle_refs: bundleRefs,
      intent_text: intentText,
    });
  }

  getSession(sessionId: string): Promise<SessionView> {
    return this.request("GET", `/sessions/${sessionId}`);
  }

  submitIntent(sessionId: string, intentText: string): Promise<SessionView> {
    return this.request("POST", `/sessions/${sessionId}/intent`, {
      intent_text: intentText,
    });
  }

  getQuestions(sessionId: string): Promise<{ questions: string[] }> {
    return this.request("GET", `/sessions/${sessionId}/questions`);
  }

  putPlan(
    sessionId: string,
    qaPairs?: Array<{ question: string; answer: string }>,
  ): Promise<SessionView> {
    return this.request("PUT", `/sessions/${sessionId}/plan`, {
      qa_pairs: qaPairs ?? null,
    });
  }

  /** Render from the plan, or re-execute user-edited source. */
  render(sessionId: string, source?: string): Promise<SessionView> {
    return this.request("POST", `/sessions/${sessionId}/render`, {
      source: source ?? null,
    });
  }

  critique(sessionId: string, aspect = "all"): Promise<SessionView> {
    return this.request("POST", `/sessions/${sessionId}/critique`, { aspect });
  }

  sendFeedback(
    sessionId: string,
    ratings: Ratings,
    text: string,
    regenerate: boolean,
  ): Promise<SessionView> {
    return this.request("POST", `/sessions/${sessionId}/feedback`, {
      ratings,
      text,
      regenerate,
    });
  }

  versionCode(
    sessionId: string,
    version: number,
  ): Promise<{ version: number; source: string }> {
    return this.request("GET", `/sessions/${sessionId}/versions/${version}/code`);
  }

  imageUrl(sessionId: string, version: number): string {
    return `${this.baseUrl}/sessions/${sessionId}/versions/${version}/image`;
  }

  /** Poll the session until the predicate holds (long-running renders). */
  async pollSession(
    sessionId: string,
    until: (view: SessionView) => boolean,
    intervalMs = 500,
    timeoutMs = 60_000,
  ): Promise<SessionView> {
    const deadline = Date.now() + timeoutMs;
    for (;;) {
      const view = await this.getSession(sessionId);
      if (until(view)) {
        return view;
      }
      if (Date.now() >= deadline) {
        throw new Error(`poll timeout for session ${sessionId}`);
      }
      await new Promise((resolve) => setTimeout(resolve, intervalMs));
    }
  }
}
