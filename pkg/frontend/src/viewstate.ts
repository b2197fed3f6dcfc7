// Pure view-state reducer: everything here is derived from protocol
// responses. No parsing, no substitution, no binding resolution — the
// service is authoritative and this module only mirrors it.

import type {
  ActionResult,
  Diagnostic,
  OpenResult,
  OutlineEntry,
  RenderModel,
  RenderSpan,
  Rewrite,
  SessionView,
  SourceEdit,
  Warning,
  WireSpan,
} from "./protocol.js";

export interface PendingRename {
  binderId: string;
  draft: string;
}

export interface ViewState {
  sessionId: string;
  outline: OutlineEntry[];
  editorText: string;
  diagnostics: Diagnostic[];
  rewrites: Rewrite[];
  selection: string | null;
  render: RenderModel | null;
  focusedRedex: number;
  pendingRename: PendingRename | null;
  warningBanner: string | null;
  connectionLost: boolean;
}

export function initialViewState(sessionId: string): ViewState {
  return {
    sessionId,
    outline: [],
    editorText: "",
    diagnostics: [],
    rewrites: [],
    selection: null,
    render: null,
    focusedRedex: 0,
    pendingRename: null,
    warningBanner: null,
    connectionLost: false,
  };
}

function mergeSessionView(state: ViewState, view: SessionView): ViewState {
  return {
    ...state,
    outline: view.outline,
    editorText: view.sourceText,
    diagnostics: view.diagnostics,
    rewrites: view.rewrites,
    selection: state.selection ?? view.selection,
    warningBanner: null,
  };
}

export function applyOpen(state: ViewState, result: OpenResult): ViewState {
  const merged = mergeSessionView(state, result);
  return {
    ...merged,
    sessionId: result.sessionId,
    selection: result.selection,
    render: null,
    focusedRedex: 0,
  };
}

export function applyRender(state: ViewState, render: RenderModel): ViewState {
  return { ...state, render, focusedRedex: render.focusedRedex, warningBanner: null };
}

/** Apply a source edit to a buffer. Pure offset arithmetic on the text the
 * service sent; the patched result must equal the service's sourceText. */
export function applySourceEdit(text: string, edit: SourceEdit): string {
  const [start, end] = spanToOffsets(text, edit.span);
  return text.slice(0, start) + edit.newText + text.slice(end);
}

export function spanToOffsets(text: string, span: WireSpan): [number, number] {
  const lineStarts = [0];
  for (let i = 0; i < text.length; i++) {
    if (text[i] === "\n") lineStarts.push(i + 1);
  }
  const at = (line: number, col: number) => lineStarts[line - 1] + (col - 1);
  return [at(span.startLine, span.startCol), at(span.endLine, span.endCol)];
}

export interface ActionOutcome {
  state: ViewState;
  /** true when the sourceEdit patch reproduced the service's text exactly */
  patchConsistent: boolean;
}

export function applyActionResult(state: ViewState, result: ActionResult): ActionOutcome {
  let patchConsistent = true;
  if (result.sourceEdit !== null) {
    const patched = applySourceEdit(state.editorText, result.sourceEdit);
    patchConsistent = patched === result.sourceText;
  }
  let next = mergeSessionView(state, result);
  if (result.render !== null) {
    next = { ...next, render: result.render, focusedRedex: result.render.focusedRedex };
  }
  return { state: { ...next, pendingRename: null }, patchConsistent };
}

export function applyEditResult(state: ViewState, view: SessionView): ViewState {
  return mergeSessionView(state, view);
}

export function applyWarning(state: ViewState, warning: Warning): ViewState {
  const names = warning.capturedNames?.length
    ? ` (${warning.capturedNames.join(", ")})`
    : "";
  return { ...state, warningBanner: `${warning.message}${names}`, pendingRename: null };
}

export function connectionLost(state: ViewState): ViewState {
  return { ...state, connectionLost: true, warningBanner: "connection lost — read-only" };
}

/** Client-side convenience gate for rename drafts (the service re-checks and
 * stays authoritative: disabling this still yields a warning round trip). */
export function renameDraftOk(draft: string): boolean {
  return /^[a-z][a-zA-Z0-9_']*$/.test(draft);
}

// --- presentation helpers (pure) --------------------------------------------

export interface Segment {
  start: number;
  end: number;
  text: string;
  spans: RenderSpan[];
}

/** Cut the rendered text into runs of characters covered by the same spans,
 * so overlapping spans never need nested markup. */
export function segmentModel(model: RenderModel): Segment[] {
  const cuts = new Set<number>([0, model.text.length]);
  for (const span of model.spans) {
    cuts.add(span.start);
    cuts.add(span.end);
  }
  const points = [...cuts].sort((a, b) => a - b);
  const segments: Segment[] = [];
  for (let i = 0; i + 1 < points.length; i++) {
    const [start, end] = [points[i], points[i + 1]];
    if (start === end) continue;
    segments.push({
      start,
      end,
      text: model.text.slice(start, end),
      spans: model.spans.filter((sp) => sp.start <= start && end <= sp.end),
    });
  }
  return segments;
}

/** Ids of the spans to highlight for an informational click: the matching
 * paren pair, or every occurrence sharing a binder. */
export function highlightGroup(model: RenderModel, span: RenderSpan): RenderSpan[] {
  if (span.tag === "paren-open" || span.tag === "paren-close") {
    return model.spans.filter(
      (sp) => (sp.tag === "paren-open" || sp.tag === "paren-close") && sp.id === span.id
    );
  }
  if (span.tag === "binder-site" || span.tag === "bound-occ") {
    return model.spans.filter(
      (sp) => (sp.tag === "binder-site" || sp.tag === "bound-occ") && sp.id === span.id
    );
  }
  return [span];
}

export function focusedRedexSpans(model: RenderModel): RenderSpan[] {
  const focus = String(model.focusedRedex);
  return model.spans.filter(
    (sp) => (sp.tag === "redex-fun" || sp.tag === "redex-arg") && sp.id === focus
  );
}
