// Wire protocol v1 types and a small fetch-based client.
// Shapes mirror docs/protocol.md in the repository root.

export const PROTOCOL_VERSION = 1;

export interface WireSpan {
  startLine: number;
  startCol: number;
  endLine: number;
  endCol: number;
}

export interface Diagnostic {
  severity: "error" | "warning";
  span: WireSpan;
  message: string;
  code: string;
}

export interface RenderSpan {
  start: number;
  end: number;
  tag:
    | "binder-site"
    | "bound-occ"
    | "free-occ"
    | "ref-site"
    | "paren-open"
    | "paren-close"
    | "redex-fun"
    | "redex-arg";
  id: string;
  defined?: boolean;
  path?: string;
}

export interface RenderModel {
  text: string;
  spans: RenderSpan[];
  redexCount: number;
  focusedRedex: number;
  normalForm: boolean;
  redexPaths: string[];
}

export interface OutlineEntry {
  id: string;
  span: WireSpan;
}

export interface Rewrite {
  span: WireSpan;
  replacement: string;
}

export interface SessionView {
  outline: OutlineEntry[];
  diagnostics: Diagnostic[];
  sourceText: string;
  rewrites: Rewrite[];
  selection: string | null;
}

export interface SourceEdit {
  span: WireSpan;
  newText: string;
}

export interface Warning {
  code: string;
  message: string;
  capturedNames?: string[];
  span?: WireSpan;
}

export type UiActionRequest =
  | { type: "beta"; path: string }
  | { type: "alpha"; path: string; newName: string }
  | { type: "expand"; path: string }
  | { type: "focus"; delta: number }
  | { type: "undo" }
  | { type: "redo" };

export interface OpenResult extends SessionView {
  sessionId: string;
}

export interface ActionResult extends SessionView {
  render: RenderModel | null;
  sourceEdit: SourceEdit | null;
}

export interface HoverInfo {
  definition: string;
  arity: number;
}

export interface CompletionItem {
  label: string;
  kind: "named_term" | "rule_arrow";
}

export type Response<R> =
  | { v: number; ok: true; result: R }
  | { v: number; ok: false; warning: Warning };

async function post<R>(endpoint: string, body: object): Promise<Response<R>> {
  const reply = await fetch(endpoint, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify({ v: PROTOCOL_VERSION, ...body }),
  });
  return (await reply.json()) as Response<R>;
}

export class RpcClient {
  constructor(
    readonly endpoint: string = "/rpc",
    readonly sessionId: string = crypto.randomUUID()
  ) {}

  open(text: string, config?: string): Promise<Response<OpenResult>> {
    const body: Record<string, unknown> = {
      op: "open",
      sessionId: this.sessionId,
      text,
    };
    if (config !== undefined) body.config = config;
    return post(this.endpoint, body);
  }

  outline(): Promise<Response<{ items: OutlineEntry[] }>> {
    return post(this.endpoint, { op: "outline", sessionId: this.sessionId });
  }

  render(itemId: string): Promise<Response<{ render: RenderModel }>> {
    return post(this.endpoint, { op: "render", sessionId: this.sessionId, itemId });
  }

  action(itemId: string, action: UiActionRequest): Promise<Response<ActionResult>> {
    return post(this.endpoint, {
      op: "action",
      sessionId: this.sessionId,
      itemId,
      action,
    });
  }

  edit(span: WireSpan, newText: string): Promise<Response<SessionView>> {
    return post(this.endpoint, { op: "edit", sessionId: this.sessionId, span, newText });
  }

  hover(itemId: string, position: number): Promise<Response<{ hover: HoverInfo | null }>> {
    return post(this.endpoint, { op: "hover", sessionId: this.sessionId, itemId, position });
  }

  complete(prefix: string): Promise<Response<{ items: CompletionItem[] }>> {
    return post(this.endpoint, { op: "complete", sessionId: this.sessionId, prefix });
  }
}
