/** Pure HTML renderers for the three studio views. Kept free of DOM
 * access so they are directly testable; main.ts mounts the strings and
 * wires events by element id. */

import {
  editorDirty,
  latestVersionNumber,
  versionHistory,
  type StudioState,
} from "./state.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function tabs(state: StudioState): string {
  const entries: Array<[string, string]> = [
    ["intent", "1 · Intent and questions"],
    ["code", "2 · Code and preview"],
    ["feedback", "3 · Rate and regenerate"],
  ];
  return entries
    .map(
      ([name, label]) =>
        `<button class="tab${state.activeView === name ? " active" : ""}" ` +
        `data-view="${name}" id="tab-${name}">${label}</button>`,
    )
    .join("");
}

export function renderIntentView(state: StudioState): string {
  const session = state.session;
  const questions = session?.questions ?? [];
  const questionItems = questions
    .map((q, i) => `<li class="question" data-index="${i}">${escapeHtml(q)}</li>`)
    .join("");
  const plan = session?.plan;
  const planRows = plan
    ? plan.qa_pairs
        .map(
          (pair) =>
            `<tr><td>${pair.question_id}</td><td>${escapeHtml(pair.question)}</td>` +
            `<td>${escapeHtml(pair.answer)}</td></tr>`,
        )
        .join("")
    : "";
  return `
  <section id="view-intent">
    <label for="intent-input">Intent of the diagram</label>
    <textarea id="intent-input" rows="3"
      placeholder="Create a flowchart of ...">${escapeHtml(session?.intent_text ?? "")}</textarea>
    <button id="submit-intent">Submit intent</button>
    ${session?.intent_label ? `<p class="label-badge">Classified as: ${escapeHtml(session.intent_label)}</p>` : ""}
    <h3>Clarification questions</h3>
    <ol id="question-list">${questionItems}</ol>
    ${
      questions.length
        ? `<label for="answers-input">Your answers (comma-separated, optional)</label>
    <textarea id="answers-input" rows="2">${escapeHtml(state.answersDraft)}</textarea>
    <button id="build-plan">Build plan</button>`
        : ""
    }
    ${
      plan
        ? `<h3>Diagram plan</h3>
    <table id="plan-table"><thead><tr><th>#</th><th>Question</th><th>Answer</th></tr></thead>
    <tbody>${planRows}</tbody></table>
    <button id="go-render">Render diagram</button>`
        : ""
    }
  </section>`;
}

export function renderCodeView(state: StudioState): string {
  const version = latestVersionNumber(state);
  const dirty = editorDirty(state);
  const sessionId = state.session?.session_id ?? "";
  const preview = version
    ? `<img id="preview-image" alt="diagram preview"
         src="/sessions/${sessionId}/versions/${version}/image" />`
    : `<p class="placeholder">No rendered version yet.</p>`;
  return `
  <section id="view-code" class="split">
    <div class="pane">
      <div class="pane-header">
        <span>Intermediate code</span>
        <span id="version-badge" class="badge">v${version ?? "-"}</span>
        ${dirty ? `<span id="dirty-flag" class="badge warn">edited - not executed</span>` : ""}
      </div>
      <textarea id="code-editor" rows="18" spellcheck="false">${escapeHtml(state.editorBuffer)}</textarea>
      <button id="run-code">Execute edited code</button>
    </div>
    <div class="pane">
      <div class="pane-header"><span>Preview</span></div>
      ${preview}
      <p id="history" class="muted">versions: ${versionHistory(state).join(" → ") || "none"}</p>
    </div>
  </section>`;
}

export function renderFeedbackView(state: StudioState): string {
  const ratingRow = (aspect: "completeness" | "correctness" | "layout", label: string) => {
    const current = state.pendingRatings[aspect];
    const buttons = [1, 2, 3, 4, 5]
      .map(
        (value) =>
          `<button class="rate${current === value ? " chosen" : ""}"
            data-aspect="${aspect}" data-value="${value}"
            id="rate-${aspect}-${value}">${value}</button>`,
      )
      .join("");
    return `<div class="rating-row"><span>${label}</span>${buttons}</div>`;
  };
  const critiques = (state.session?.critiques ?? [])
    .map(
      (c) =>
        `<li><strong>${escapeHtml(c.aspect)}</strong> ${c.score.toFixed(1)}: ` +
        `${escapeHtml(c.feedback || "satisfied")}</li>`,
    )
    .join("");
  return `
  <section id="view-feedback">
    <h3>Rate the diagram (1-5)</h3>
    ${ratingRow("completeness", "Completeness")}
    ${ratingRow("correctness", "Correctness")}
    ${ratingRow("layout", "Layout")}
    <label for="feedback-input">Corrections or missing data</label>
    <textarea id="feedback-input" rows="3">${escapeHtml(state.feedbackDraft)}</textarea>
    <div class="actions">
      <button id="regenerate">Regenerate</button>
      <button id="save">Save</button>
    </div>
    <h3>Critic reports</h3>
    <ul id="critique-list">${critiques}</ul>
  </section>`;
}

export function renderApp(state: StudioState): string {
  const body =
    state.activeView === "intent"
      ? renderIntentView(state)
      : state.activeView === "code"
        ? renderCodeView(state)
        : renderFeedbackView(state);
  const status = state.session
    ? `session ${state.session.session_id} · state ${state.session.state}`
    : "no session";
  return `
  <header>
    <h1>Diagram studio</h1>
    <nav>${tabs(state)}</nav>
    <p id="status" class="muted">${escapeHtml(status)}${state.busy ? " · working…" : ""}</p>
    ${state.notice ? `<p id="notice" class="notice">${escapeHtml(state.notice)}</p>` : ""}
  </header>
  ${body}`;
}
