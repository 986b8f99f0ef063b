/** Browser bootstrap: mount the studio into #app and delegate events. */

import { ApiClient } from "./api.js";
import { Studio } from "./controller.js";
import { renderApp } from "./render.js";
import type { Ratings } from "./types.js";

const root = document.getElementById("app");
if (!root) {
  throw new Error("missing #app mount point");
}

const api = new ApiClient("");
const studio = new Studio(api, (state) => {
  root.innerHTML = renderApp(state);
});

function value(id: string): string {
  const element = document.getElementById(id) as HTMLTextAreaElement | null;
  return element ? element.value : "";
}

root.addEventListener("input", (event) => {
  const target = event.target as HTMLElement;
  // keep drafts in state without re-rendering on every keystroke
  if (target.id === "code-editor") {
    studio.state.editorBuffer = (target as HTMLTextAreaElement).value;
  } else if (target.id === "feedback-input") {
    studio.state.feedbackDraft = (target as HTMLTextAreaElement).value;
  } else if (target.id === "answers-input") {
    studio.state.answersDraft = (target as HTMLTextAreaElement).value;
  }
});

root.addEventListener("click", (event) => {
  const target = event.target as HTMLElement;
  const view = target.dataset.view;
  if (view === "intent" || view === "code" || view === "feedback") {
    studio.show(view);
    return;
  }
  if (target.classList.contains("rate")) {
    studio.rate(
      target.dataset.aspect as keyof Ratings,
      Number(target.dataset.value),
    );
    return;
  }
  switch (target.id) {
    case "submit-intent":
      void studio.submitIntent(value("intent-input"));
      break;
    case "build-plan":
      studio.setAnswersDraft(value("answers-input"));
      void studio.buildPlan();
      break;
    case "go-render":
      void studio.renderDiagram();
      break;
    case "run-code":
      studio.setEditorBuffer(value("code-editor"));
      void studio.runEditedCode();
      break;
    case "regenerate":
      studio.setFeedbackDraft(value("feedback-input"));
      void studio.regenerate();
      break;
    case "save":
      studio.setFeedbackDraft(value("feedback-input"));
      void studio.save();
      break;
  }
});

const params = new URLSearchParams(window.location.search);
const existing = params.get("session");
const bundle = params.get("bundle");
if (existing) {
  void studio.attach(existing);
} else if (bundle) {
  void studio.start([bundle]);
} else {
  root.innerHTML = renderApp(studio.state);
}
