// Three-pane workbench: outline sidebar, source editor, manipulation view.
// Every state change round-trips through the protocol; at most one mutating
// request is in flight per session (queued client-side).

import type { RenderModel, UiActionRequest } from "./protocol.js";
import { RpcClient } from "./protocol.js";
import {
  applyActionResult,
  applyEditResult,
  applyOpen,
  applyRender,
  applyWarning,
  connectionLost,
  initialViewState,
  renameDraftOk,
  ViewState,
} from "./viewstate.js";
import { renderManipulationView } from "./manipulation.js";

const SAMPLE = `True := { λx. λy. x }

{ (λx. x) y }

{ True a b }
`;

const client = new RpcClient();
let state: ViewState = initialViewState(client.sessionId);
let mutationQueue: Promise<void> = Promise.resolve();

const outlineEl = document.getElementById("outline") as HTMLUListElement;
const editorEl = document.getElementById("editor") as HTMLTextAreaElement;
const parserOutEl = document.getElementById("parser-output") as HTMLDivElement;
const viewEl = document.getElementById("manipulation") as HTMLDivElement;
const bannerEl = document.getElementById("banner") as HTMLDivElement;
const navEl = document.getElementById("redex-nav") as HTMLDivElement;
const tooltipEl = document.getElementById("tooltip") as HTMLDivElement;

function enqueue(work: () => Promise<void>): void {
  mutationQueue = mutationQueue.then(work).catch((err) => {
    console.error(err);
    state = connectionLost(state);
    paint();
  });
}

function paint(): void {
  outlineEl.textContent = "";
  for (const entry of state.outline) {
    const li = document.createElement("li");
    li.textContent = entry.id;
    li.classList.toggle("selected", entry.id === state.selection);
    li.addEventListener("click", () => selectItem(entry.id, entry.span.endLine));
    outlineEl.appendChild(li);
  }

  if (editorEl.value !== state.editorText) {
    editorEl.value = state.editorText;
  }
  editorEl.disabled = state.connectionLost;

  parserOutEl.textContent = "";
  for (const d of state.diagnostics) {
    const row = document.createElement("div");
    row.className = `diag diag-${d.severity}`;
    row.textContent = `${d.span.startLine}:${d.span.startCol} ${d.severity}: ${d.message}`;
    parserOutEl.appendChild(row);
  }
  for (const rw of state.rewrites) {
    const row = document.createElement("div");
    row.className = "rewrite";
    row.textContent = `${rw.span.startLine}:${rw.span.startCol} shown as ${rw.replacement}`;
    parserOutEl.appendChild(row);
  }

  bannerEl.textContent = state.warningBanner ?? "";
  bannerEl.classList.toggle("visible", state.warningBanner !== null);

  if (state.render) {
    renderManipulationView(viewEl, state.render, {
      onRenameCommit: commitRename,
      onExpandRef: (path) => sendAction({ type: "expand", path }),
      onBetaFocused: betaFocused,
      onHoverRef: showTooltip,
      onHoverEnd: () => tooltipEl.classList.remove("visible"),
    });
    navEl.textContent = state.render.normalForm
      ? "normal form"
      : `redex ${state.render.focusedRedex + 1} / ${state.render.redexCount}`;
  } else {
    viewEl.textContent = "";
    navEl.textContent = "";
  }
}

function selectItem(itemId: string, endLine: number): void {
  state = { ...state, selection: itemId };
  // move the cursor to the end of the item's source
  const lines = state.editorText.split("\n").slice(0, endLine);
  editorEl.focus();
  const offset = lines.join("\n").length;
  editorEl.setSelectionRange(offset, offset);
  enqueue(async () => {
    const reply = await client.render(itemId);
    state = reply.ok ? applyRender(state, reply.result.render) : applyWarning(state, reply.warning);
    paint();
  });
}

function currentModel(): RenderModel | null {
  return state.render;
}

function sendAction(action: UiActionRequest): void {
  const itemId = state.selection;
  if (itemId === null) return;
  enqueue(async () => {
    const reply = await client.action(itemId, action);
    if (!reply.ok) {
      state = applyWarning(state, reply.warning);
    } else {
      const outcome = applyActionResult(state, reply.result);
      if (!outcome.patchConsistent) {
        console.warn("source edit patch disagreed with service text; using service text");
      }
      state = outcome.state;
    }
    paint();
  });
}

function betaFocused(): void {
  const model = currentModel();
  if (!model || model.normalForm) return;
  sendAction({ type: "beta", path: model.redexPaths[model.focusedRedex] });
}

function commitRename(binderId: string, draft: string): void {
  if (!renameDraftOk(draft)) {
    // enforce the naming convention before bothering the service; the
    // service still re-checks when this gate is bypassed
    state = { ...state, warningBanner: `"${draft}" is not a legal variable name (lowercase initial)` };
    paint();
    return;
  }
  sendAction({ type: "alpha", path: binderId, newName: draft });
}

function showTooltip(position: number, anchor: HTMLElement): void {
  const itemId = state.selection;
  if (itemId === null) return;
  enqueue(async () => {
    const reply = await client.hover(itemId, position);
    if (reply.ok && reply.result.hover) {
      const { definition, arity } = reply.result.hover;
      tooltipEl.textContent = `${definition}   (arity ${arity})`;
      const rect = anchor.getBoundingClientRect();
      tooltipEl.style.left = `${rect.left}px`;
      tooltipEl.style.top = `${rect.bottom + 4}px`;
      tooltipEl.classList.add("visible");
    }
  });
}

let editDebounce: number | undefined;
editorEl.addEventListener("input", () => {
  window.clearTimeout(editDebounce);
  const newText = editorEl.value;
  editDebounce = window.setTimeout(() => {
    const lines = state.editorText.split("\n");
    const span = {
      startLine: 1,
      startCol: 1,
      endLine: lines.length,
      endCol: lines[lines.length - 1].length + 1,
    };
    enqueue(async () => {
      const reply = await client.edit(span, newText);
      state = reply.ok ? applyEditResult(state, reply.result) : applyWarning(state, reply.warning);
      if (state.selection) {
        const render = await client.render(state.selection);
        if (render.ok) state = applyRender(state, render.result.render);
        else state = { ...state, render: null };
      }
      paint();
    });
  }, 400);
});

document.addEventListener("keydown", (ev) => {
  if (!ev.ctrlKey) return;
  const key = ev.key.toLowerCase();
  if (key === "p" || key === "n") {
    ev.preventDefault();
    sendAction({ type: "focus", delta: key === "n" ? 1 : -1 });
  } else if (key === "a") {
    ev.preventDefault();
    betaFocused();
  } else if (key === "z") {
    ev.preventDefault();
    sendAction({ type: "undo" });
  } else if (key === "y") {
    ev.preventDefault();
    sendAction({ type: "redo" });
  }
});

document.getElementById("btn-undo")?.addEventListener("click", () => sendAction({ type: "undo" }));
document.getElementById("btn-redo")?.addEventListener("click", () => sendAction({ type: "redo" }));
document.getElementById("btn-prev")?.addEventListener("click", () => sendAction({ type: "focus", delta: -1 }));
document.getElementById("btn-next")?.addEventListener("click", () => sendAction({ type: "focus", delta: 1 }));

enqueue(async () => {
  const reply = await client.open(SAMPLE);
  if (reply.ok) {
    state = applyOpen(state, reply.result);
    if (state.selection) {
      const render = await client.render(state.selection);
      if (render.ok) state = applyRender(state, render.result.render);
    }
  } else {
    state = applyWarning(state, reply.warning);
  }
  paint();
});
