// DOM rendering for the manipulation view. All semantics (which characters
// form a binder, where the redexes are) come from the server's render model;
// this module only turns spans into styled elements and raises callbacks.

import type { RenderModel, RenderSpan } from "./protocol.js";
import { focusedRedexSpans, highlightGroup, segmentModel } from "./viewstate.js";

export interface ManipulationCallbacks {
  onRenameCommit(binderId: string, draft: string): void;
  onExpandRef(path: string): void;
  onBetaFocused(): void;
  onHoverRef(position: number, anchor: HTMLElement): void;
  onHoverEnd(): void;
}

function spanClass(tag: string): string {
  return "t-" + tag;
}

export function renderManipulationView(
  container: HTMLElement,
  model: RenderModel,
  callbacks: ManipulationCallbacks
): void {
  container.textContent = "";
  container.classList.toggle("normal-form", model.normalForm);
  const focused = new Set(focusedRedexSpans(model));
  const line = document.createElement("div");
  line.className = "term-line";
  for (const segment of segmentModel(model)) {
    const el = document.createElement("span");
    el.textContent = segment.text;
    el.dataset.start = String(segment.start);
    el.dataset.end = String(segment.end);
    for (const sp of segment.spans) {
      el.classList.add(spanClass(sp.tag));
      if (sp.tag === "ref-site") {
        el.classList.add(sp.defined ? "ref-defined" : "ref-undefined");
      }
      if (focused.has(sp)) {
        el.classList.add(sp.tag === "redex-fun" ? "focus-fun" : "focus-arg");
      }
    }
    wireSegment(el, segment.spans, model, container, callbacks);
    line.appendChild(el);
  }
  container.appendChild(line);
}

function byTag(spans: RenderSpan[], ...tags: string[]): RenderSpan | undefined {
  return spans.find((sp) => tags.includes(sp.tag));
}

function wireSegment(
  el: HTMLElement,
  spans: RenderSpan[],
  model: RenderModel,
  container: HTMLElement,
  callbacks: ManipulationCallbacks
): void {
  el.addEventListener("click", (ev) => {
    if (!ev.ctrlKey) return;
    const target =
      byTag(spans, "paren-open", "paren-close") ?? byTag(spans, "binder-site", "bound-occ");
    if (!target) return;
    ev.preventDefault();
    applyHighlight(container, model, target);
  });

  el.addEventListener("dblclick", (ev) => {
    const binder = byTag(spans, "binder-site");
    if (binder) {
      ev.preventDefault();
      openRenameInput(el, binder.id, callbacks);
      return;
    }
    const ref = byTag(spans, "ref-site");
    if (ref && ref.defined && ref.path !== undefined) {
      ev.preventDefault();
      callbacks.onExpandRef(ref.path);
    }
  });

  const ref = byTag(spans, "ref-site");
  if (ref) {
    el.addEventListener("mouseenter", () => callbacks.onHoverRef(ref.start, el));
    el.addEventListener("mouseleave", () => callbacks.onHoverEnd());
  }

  // drag the focused argument onto the focused function box
  const focusedArg = spans.find(
    (sp) => sp.tag === "redex-arg" && sp.id === String(model.focusedRedex)
  );
  if (focusedArg) {
    el.draggable = true;
    el.addEventListener("dragstart", (ev) => {
      ev.dataTransfer?.setData("text/x-redex", focusedArg.id);
    });
  }
  const focusedFun = spans.find(
    (sp) => sp.tag === "redex-fun" && sp.id === String(model.focusedRedex)
  );
  if (focusedFun) {
    el.addEventListener("dragover", (ev) => ev.preventDefault());
    el.addEventListener("drop", (ev) => {
      ev.preventDefault();
      if (ev.dataTransfer?.getData("text/x-redex") === focusedFun.id) {
        callbacks.onBetaFocused();
      }
    });
  }
}

function applyHighlight(container: HTMLElement, model: RenderModel, target: RenderSpan): void {
  for (const el of container.querySelectorAll(".hl")) el.classList.remove("hl");
  const group = highlightGroup(model, target);
  for (const el of container.querySelectorAll<HTMLElement>(".term-line > span")) {
    const start = Number(el.dataset.start);
    const end = Number(el.dataset.end);
    if (group.some((sp) => sp.start <= start && end <= sp.end)) {
      el.classList.add("hl");
    }
  }
}

function openRenameInput(
  anchor: HTMLElement,
  binderId: string,
  callbacks: ManipulationCallbacks
): void {
  const existing = document.querySelector(".rename-input");
  existing?.remove();
  const input = document.createElement("input");
  input.className = "rename-input";
  input.placeholder = "new name";
  input.addEventListener("keydown", (ev) => {
    if (ev.key === "Enter") {
      callbacks.onRenameCommit(binderId, input.value.trim());
      input.remove();
    } else if (ev.key === "Escape") {
      input.remove();
    }
  });
  anchor.insertAdjacentElement("afterend", input);
  input.focus();
}
