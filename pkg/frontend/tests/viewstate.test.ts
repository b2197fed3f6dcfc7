// Headless fixture replay: the recorded protocol exchange drives the pure
// view-state reducer. The client performs no term logic — every assertion
// checks that state mirrors what the service said, including byte-exact
// source reconstruction from sourceEdit patches.

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, test } from "vitest";

import type {
  ActionResult,
  OpenResult,
  RenderModel,
  SessionView,
  Warning,
} from "../src/protocol.js";
import {
  applyActionResult,
  applyEditResult,
  applyOpen,
  applyRender,
  applySourceEdit,
  applyWarning,
  focusedRedexSpans,
  highlightGroup,
  initialViewState,
  renameDraftOk,
  segmentModel,
  spanToOffsets,
  ViewState,
} from "../src/viewstate.js";

const here = dirname(fileURLToPath(import.meta.url));
const fixturePath = join(here, "..", "..", "tests", "fixtures", "protocol_golden.json");

interface Exchange {
  request: Record<string, any>;
  response:
    | { v: number; ok: true; result: any }
    | { v: number; ok: false; warning: Warning };
}

const exchange: Exchange[] = JSON.parse(readFileSync(fixturePath, "utf-8"));

function replay(): { state: ViewState; actionsApplied: number } {
  let state = initialViewState("pending");
  let actionsApplied = 0;
  for (const { request, response } of exchange) {
    if (request.sessionId !== "golden") continue; // deliberate bad-session probe
    if (!response.ok) {
      if (response.warning.code !== "unsupported_version") {
        state = applyWarning(state, response.warning);
      }
      continue;
    }
    const result = response.result;
    switch (request.op) {
      case "open":
        state = applyOpen(state, result as OpenResult);
        break;
      case "render":
        state = applyRender(state, (result as { render: RenderModel }).render);
        break;
      case "action": {
        const outcome = applyActionResult(state, result as ActionResult);
        expect(outcome.patchConsistent).toBe(true);
        state = outcome.state;
        actionsApplied += 1;
        break;
      }
      case "edit":
        state = applyEditResult(state, result as SessionView);
        break;
      default:
        break; // outline/hover/complete responses carry no state the panes cache
    }
  }
  return { state, actionsApplied };
}

describe("golden fixture replay", () => {
  test("covers open, render, actions, edit, and warnings", () => {
    const ops = new Set(exchange.map((e) => e.request.op));
    for (const op of ["open", "outline", "render", "action", "edit", "hover", "complete"]) {
      expect(ops).toContain(op);
    }
  });

  test("source edits reproduce the service text byte-exactly", () => {
    const { state, actionsApplied } = replay();
    expect(actionsApplied).toBeGreaterThanOrEqual(4);
    const last = [...exchange]
      .reverse()
      .find((e) => e.response.ok && "sourceText" in (e.response as any).result);
    expect(state.editorText).toBe((last!.response as any).result.sourceText);
  });

  test("warnings set the banner and never mutate the document", () => {
    let state = initialViewState("x");
    const open = exchange.find((e) => e.request.op === "open")!;
    state = applyOpen(state, (open.response as any).result);
    const before = state.editorText;
    const capture = exchange.find(
      (e) => !e.response.ok && (e.response as any).warning.code === "capture"
    )!;
    state = applyWarning(state, (capture.response as any).warning);
    expect(state.warningBanner).toContain("w");
    expect(state.editorText).toBe(before);
  });

  test("render model arrives with redex paths so no term analysis is needed", () => {
    const render = exchange.find((e) => e.request.op === "render")!;
    const model: RenderModel = (render.response as any).result.render;
    expect(model.redexPaths.length).toBe(model.redexCount);
    expect(model.normalForm).toBe(model.redexCount === 0);
  });
});

describe("pure helpers", () => {
  const model: RenderModel = (exchange.find((e) => e.request.op === "render")!.response as any)
    .result.render;

  test("segments tile the text exactly", () => {
    const segments = segmentModel(model);
    expect(segments.map((s) => s.text).join("")).toBe(model.text);
    for (let i = 1; i < segments.length; i++) {
      expect(segments[i].start).toBe(segments[i - 1].end);
    }
  });

  test("paren highlight groups come in pairs", () => {
    const paren = model.spans.find((sp) => sp.tag === "paren-open");
    if (paren) {
      const group = highlightGroup(model, paren);
      expect(group.length).toBe(2);
      expect(new Set(group.map((sp) => sp.tag))).toEqual(
        new Set(["paren-open", "paren-close"])
      );
    }
  });

  test("binder highlight group covers site and occurrences", () => {
    const binder = model.spans.find((sp) => sp.tag === "binder-site");
    if (binder) {
      const group = highlightGroup(model, binder);
      expect(group.every((sp) => sp.id === binder.id)).toBe(true);
      expect(group.some((sp) => sp.tag === "binder-site")).toBe(true);
    }
  });

  test("focused redex spans match the focus index", () => {
    for (const sp of focusedRedexSpans(model)) {
      expect(sp.id).toBe(String(model.focusedRedex));
    }
  });

  test("span offsets handle multi-line text", () => {
    const text = "ab\ncde\nf";
    expect(spanToOffsets(text, { startLine: 2, startCol: 2, endLine: 3, endCol: 1 })).toEqual([
      4, 7,
    ]);
    expect(applySourceEdit(text, {
      span: { startLine: 2, startCol: 2, endLine: 3, endCol: 1 },
      newText: "X",
    })).toBe("ab\ncXf");
  });

  test("rename pre-check matches the service's naming convention", () => {
    expect(renameDraftOk("y")).toBe(true);
    expect(renameDraftOk("y2'")).toBe(true);
    expect(renameDraftOk("Y")).toBe(false);
    expect(renameDraftOk("")).toBe(false);
    expect(renameDraftOk("2x")).toBe(false);
  });
});
