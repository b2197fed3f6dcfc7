"""JSON wire protocol between the workbench service and its clients.

One request/response pair per workspace operation, every message carrying
`"v": 1`. Requests are `{v, op, sessionId, ...args}`; responses are
`{v, ok: true, result: …}` or `{v, ok: false, warning: {code, message, …}}`.
The exact shapes are documented in docs/protocol.md and pinned by golden
fixture tests. `serve` hosts the protocol over HTTP POST /rpc and optionally
a static client bundle.
"""

from __future__ import annotations

import json
import threading
import uuid
from dataclasses import dataclass, field
from http import HTTPStatus
from http.server import SimpleHTTPRequestHandler, ThreadingHTTPServer
from typing import Optional

from .derivation import AlphaRename, BetaAt, ExpandAt
from .syntax import DEFAULT_CONFIG, Diagnostic, SourceSpan, SyntaxConfig, parse_config, rewrite_keywords
from .workspace import (
    ActionWarning,
    FocusRedex,
    Redo,
    RenderModel,
    Session,
    Undo,
    UnknownItem,
    completions,
    edit_text,
    hover_info,
    open_session,
    outline,
    parse_path,
    render,
    ui_action,
)

PROTOCOL_VERSION = 1


class ProtocolError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


# --- serialization -----------------------------------------------------------


def span_json(span: SourceSpan) -> dict:
    return {
        "startLine": span.start_line,
        "startCol": span.start_col,
        "endLine": span.end_line,
        "endCol": span.end_col,
    }


def json_span(obj: dict) -> SourceSpan:
    try:
        return SourceSpan(
            obj["startLine"], obj["startCol"], obj["endLine"], obj["endCol"]
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ProtocolError("bad_request", f"malformed span: {exc}") from exc


def diagnostic_json(d: Diagnostic) -> dict:
    return {
        "severity": d.severity.value,
        "span": span_json(d.span),
        "message": d.message,
        "code": d.code,
    }


def render_model_json(model: RenderModel) -> dict:
    spans = []
    for sp in model.spans:
        entry = {"start": sp.start, "end": sp.end, "tag": sp.tag, "id": sp.ident}
        if sp.defined is not None:
            entry["defined"] = sp.defined
        if sp.path is not None:
            entry["path"] = sp.path
        spans.append(entry)
    return {
        "text": model.text,
        "spans": spans,
        "redexCount": model.redex_count,
        "focusedRedex": model.focused_redex,
        "normalForm": model.normal_form,
        "redexPaths": list(model.redex_paths),
    }


def outline_json(s: Session) -> list:
    return [{"id": item_id, "span": span_json(span)} for item_id, span in outline(s)]


def warning_json(w: ActionWarning) -> dict:
    out = {"code": w.code, "message": w.message}
    if w.captured:
        out["capturedNames"] = list(w.captured)
    if w.span is not None:
        out["span"] = span_json(w.span)
    return out


def _session_view(s: Session) -> dict:
    return {
        "outline": outline_json(s),
        "diagnostics": [diagnostic_json(d) for d in s.diagnostics],
        "sourceText": s.source_text,
        "rewrites": [
            {"span": span_json(span), "replacement": repl}
            for span, repl in rewrite_keywords(s.source_text, s.config)
        ],
        "selection": s.selection,
    }


def _parse_action(obj) -> object:
    if not isinstance(obj, dict) or "type" not in obj:
        raise ProtocolError("bad_request", "action must be an object with a type")
    kind = obj["type"]
    try:
        if kind == "beta":
            return BetaAt(parse_path(obj["path"]))
        if kind == "alpha":
            return AlphaRename(parse_path(obj["path"]), obj["newName"])
        if kind == "expand":
            return ExpandAt(parse_path(obj["path"]))
        if kind == "focus":
            return FocusRedex(int(obj["delta"]))
        if kind == "undo":
            return Undo()
        if kind == "redo":
            return Redo()
    except ProtocolError:
        raise
    except Exception as exc:
        raise ProtocolError("bad_request", f"malformed {kind} action: {exc}") from exc
    raise ProtocolError("bad_request", f"unknown action type {kind!r}")


# --- dispatcher ---------------------------------------------------------------


@dataclass
class SessionStore:
    """One live session per client id, mutations serialized per session."""

    config: SyntaxConfig = DEFAULT_CONFIG
    sessions: dict = field(default_factory=dict)
    locks: dict = field(default_factory=dict)
    _registry_lock: threading.Lock = field(default_factory=threading.Lock)

    def lock_for(self, session_id: str) -> threading.Lock:
        with self._registry_lock:
            return self.locks.setdefault(session_id, threading.Lock())

    def get(self, session_id) -> Session:
        try:
            return self.sessions[session_id]
        except KeyError:
            raise ProtocolError("unknown_session", f"no session {session_id!r}") from None


def handle_request(store: SessionStore, request: dict) -> dict:
    try:
        return _dispatch(store, request)
    except ProtocolError as exc:
        return _refuse(exc.code, str(exc))
    except UnknownItem as exc:
        return _refuse("unknown_item", f"no item {exc.args[0]!r}")


def _refuse(code: str, message: str, **extra) -> dict:
    warning = {"code": code, "message": message}
    warning.update(extra)
    return {"v": PROTOCOL_VERSION, "ok": False, "warning": warning}


def _ok(result: dict) -> dict:
    return {"v": PROTOCOL_VERSION, "ok": True, "result": result}


def _dispatch(store: SessionStore, request: dict) -> dict:
    if not isinstance(request, dict):
        raise ProtocolError("bad_request", "request must be a JSON object")
    if request.get("v") != PROTOCOL_VERSION:
        raise ProtocolError(
            "unsupported_version", f"this service speaks v{PROTOCOL_VERSION}"
        )
    op = request.get("op")
    if op == "open":
        text = request.get("text", "")
        if not isinstance(text, str):
            raise ProtocolError("bad_request", "text must be a string")
        config = store.config
        if "config" in request:
            cfg_text = request["config"]
            if not isinstance(cfg_text, str):
                raise ProtocolError("bad_request", "config must be config-file text")
            try:
                config = parse_config(cfg_text)
            except Exception as exc:
                raise ProtocolError("bad_config", str(exc)) from exc
        session_id = request.get("sessionId") or uuid.uuid4().hex
        with store.lock_for(session_id):
            session = open_session(text, config)
            store.sessions[session_id] = session
            return _ok({"sessionId": session_id, **_session_view(session)})

    session_id = request.get("sessionId")
    if session_id is None:
        raise ProtocolError("bad_request", "sessionId is required")
    lock = store.lock_for(session_id)

    if op == "outline":
        with lock:
            return _ok({"items": outline_json(store.get(session_id))})
    if op == "render":
        with lock:
            s = store.get(session_id)
            model = render(s, _item_id(request))
            return _ok({"render": render_model_json(model)})
    if op == "action":
        with lock:
            s = store.get(session_id)
            action = _parse_action(request.get("action"))
            out = ui_action(s, _item_id(request), action)
            if out.warning is not None:
                return _refuse(out.warning.code, out.warning.message, **(
                    {"capturedNames": list(out.warning.captured)} if out.warning.captured else {}
                ))
            store.sessions[session_id] = out.session
            result = {
                "render": render_model_json(out.model) if out.model else None,
                "sourceEdit": None,
                **_session_view(out.session),
            }
            if out.source_edit is not None:
                span, new_text = out.source_edit
                result["sourceEdit"] = {"span": span_json(span), "newText": new_text}
            return _ok(result)
    if op == "edit":
        with lock:
            s = store.get(session_id)
            span = json_span(request.get("span", {}))
            new_text = request.get("newText")
            if not isinstance(new_text, str):
                raise ProtocolError("bad_request", "newText must be a string")
            s2 = edit_text(s, span, new_text)
            store.sessions[session_id] = s2
            return _ok(_session_view(s2))
    if op == "hover":
        with lock:
            s = store.get(session_id)
            position = request.get("position")
            if not isinstance(position, int):
                raise ProtocolError("bad_request", "position must be an offset")
            info = hover_info(s, _item_id(request), position)
            if info is None:
                return _ok({"hover": None})
            definition, arity = info
            return _ok({"hover": {"definition": definition, "arity": arity}})
    if op == "complete":
        with lock:
            s = store.get(session_id)
            prefix = request.get("prefix", "")
            if not isinstance(prefix, str):
                raise ProtocolError("bad_request", "prefix must be a string")
            items = [
                {"label": label, "kind": kind.value}
                for label, kind in completions(s, prefix)
            ]
            return _ok({"items": items})
    raise ProtocolError("unknown_op", f"unknown op {op!r}")


def _item_id(request: dict) -> str:
    item_id = request.get("itemId")
    if not isinstance(item_id, str):
        raise ProtocolError("bad_request", "itemId is required")
    return item_id


# --- HTTP transport -----------------------------------------------------------


def make_server(port: int, root: Optional[str] = None, config: SyntaxConfig = DEFAULT_CONFIG):
    store = SessionStore(config=config)

    class Handler(SimpleHTTPRequestHandler):
        def __init__(self, *args, **kwargs):
            kwargs["directory"] = root
            super().__init__(*args, **kwargs)

        def log_message(self, fmt, *args):  # quiet by default
            pass

        def do_POST(self):
            if self.path != "/rpc":
                self.send_error(HTTPStatus.NOT_FOUND)
                return
            length = int(self.headers.get("Content-Length", 0))
            raw = self.rfile.read(length)
            try:
                request = json.loads(raw.decode("utf-8"))
            except Exception:
                response = _refuse("bad_request", "body is not valid JSON")
            else:
                response = handle_request(store, request)
            payload = json.dumps(response, ensure_ascii=False).encode("utf-8")
            self.send_response(HTTPStatus.OK)
            self.send_header("Content-Type", "application/json; charset=utf-8")
            self.send_header("Content-Length", str(len(payload)))
            self.end_headers()
            self.wfile.write(payload)

        def do_GET(self):
            if root is None:
                self.send_error(HTTPStatus.NOT_FOUND, "no static root configured")
                return
            super().do_GET()

    class Server(ThreadingHTTPServer):
        # wait for in-flight handlers on close instead of killing them
        daemon_threads = False
        block_on_close = True

    server = Server(("127.0.0.1", port), Handler)
    server.store = store  # type: ignore[attr-defined]
    return server


def serve(port: int, root: Optional[str] = None, config: SyntaxConfig = DEFAULT_CONFIG) -> None:
    server = make_server(port, root, config)
    host, actual_port = server.server_address[:2]
    print(f"lambda-lab service on http://{host}:{actual_port}/rpc" + (f" (ui at /)" if root else ""))
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.shutdown()
        server.server_close()
