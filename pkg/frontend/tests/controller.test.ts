/** Studio walkthroughs against the mocked API: the UI computes no
 * pipeline logic locally, so every assertion is on round-tripped state. */

import { beforeEach, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { Studio } from "../src/controller.js";
import { editorDirty, latestVersionNumber, versionHistory } from "../src/state.js";
import { MockServer } from "./mock_server.js";

let server: MockServer;
let studio: Studio;

beforeEach(async () => {
  server = new MockServer();
  studio = new Studio(new ApiClient("", server.fetch));
  await studio.start(["papers/edgecache.json"]);
});

describe("intent entry (page 1)", () => {
  it("submitting the intent renders the questions in order", async () => {
    await studio.submitIntent("Create a flowchart of the admission pipeline.");
    expect(studio.state.session?.state).toBe("questioned");
    expect(studio.state.session?.questions).toEqual([
      "What are the stages of the admission pipeline?",
      "In what order do the pipeline stages run?",
      "Which stage makes the final eviction decision?",
    ]);
  });

  it("comma-separated answers become the plan's QA pairs", async () => {
    await studio.submitIntent("Create a flowchart of the admission pipeline.");
    studio.setAnswersDraft("classify then sketch, top to bottom");
    await studio.buildPlan();
    const plan = studio.state.session?.plan;
    expect(plan?.qa_pairs).toHaveLength(2);
    expect(plan?.qa_pairs[0].answer).toBe("classify then sketch");
    expect(plan?.qa_pairs[1].answer).toBe("top to bottom");
  });
});

describe("code and preview (page 2)", () => {
  beforeEach(async () => {
    await studio.submitIntent("Create a flowchart of the admission pipeline.");
    await studio.buildPlan();
    await studio.renderDiagram();
  });

  it("rendering loads the server source into the editor", () => {
    expect(latestVersionNumber(studio.state)).toBe(1);
    expect(studio.state.editorBuffer).toContain("matplotlib");
    expect(editorDirty(studio.state)).toBe(false);
  });

  it("an edited buffer is flagged until executed", () => {
    studio.setEditorBuffer(studio.state.editorBuffer + "# tweak\n");
    expect(editorDirty(studio.state)).toBe(true);
  });

  it("executing edited code yields a new version and a fresh preview", async () => {
    const before = latestVersionNumber(studio.state);
    studio.setEditorBuffer(studio.state.editorBuffer + "# tweak\n");
    await studio.runEditedCode();
    expect(latestVersionNumber(studio.state)).toBe((before ?? 0) + 1);
    expect(studio.state.session?.versions.at(-1)?.origin).toBe("human-edit");
    expect(editorDirty(studio.state)).toBe(false);
    // the edit round-tripped: the server executed exactly our buffer
    const executed = server.requests.find(
      (r) => r.method === "POST" && r.path.endsWith("/render") && (r.body as any).source,
    );
    expect((executed?.body as any).source).toContain("# tweak");
  });
});

describe("rate and regenerate (page 3)", () => {
  beforeEach(async () => {
    await studio.submitIntent("Create a flowchart of the admission pipeline.");
    await studio.buildPlan();
    await studio.renderDiagram();
  });

  it("rating 3 plus a remark plus Regenerate produces a new version with the prior in history", async () => {
    studio.rate("completeness", 3);
    studio.setFeedbackDraft("the arbitration stage is missing");
    await studio.regenerate();

    expect(versionHistory(studio.state)).toEqual([1, 2]);
    expect(studio.state.session?.versions.at(-1)?.origin).toBe("refinement");
    // prior version still reachable in the immutable history
    expect(studio.state.session?.versions[0].version).toBe(1);
    // the remark flowed into the regenerated source via the server
    expect(studio.state.editorBuffer).toContain("arbitration stage is missing");
    // ratings and remark were recorded server-side
    expect(studio.state.session?.ratings[0].ratings).toEqual({ completeness: 3 });
    expect(studio.state.session?.feedback_notes).toContain(
      "the arbitration stage is missing",
    );
  });

  it("save closes the session without destroying prior versions", async () => {
    studio.rate("correctness", 4);
    await studio.save();
    expect(studio.state.session?.state).toBe("done");
    expect(versionHistory(studio.state)).toEqual([1]);
  });

  it("non-integer ratings are rejected locally before any request", () => {
    const requestsBefore = server.requests.length;
    studio.rate("layout", 4.5 as unknown as number);
    expect(studio.state.pendingRatings.layout).toBeUndefined();
    expect(studio.state.notice).toContain("1 to 5");
    expect(server.requests.length).toBe(requestsBefore);
  });

  it("server rejections surface as notices, state unchanged", async () => {
    // drive the session to done, then try to regenerate
    await studio.save();
    await studio.regenerate();
    expect(studio.state.notice).toContain("IllegalTransition");
    expect(studio.state.session?.state).toBe("done");
  });
});

describe("api discipline", () => {
  it("every studio action is a network round-trip (no local pipeline logic)", async () => {
    await studio.submitIntent("Create a flowchart.");
    await studio.buildPlan();
    await studio.renderDiagram();
    const paths = server.requests.map((r) => `${r.method} ${r.path}`);
    expect(paths).toContain("POST /sessions");
    expect(paths.some((p) => p.includes("/intent"))).toBe(true);
    expect(paths.some((p) => p.includes("/plan"))).toBe(true);
    expect(paths.some((p) => p.includes("/render"))).toBe(true);
    expect(paths.some((p) => p.includes("/code"))).toBe(true);
  });
});
