"""Session state shared by the editor and the manipulation view.

A session owns the source text; the document, environment, and diagnostics
are always re-derived from it by parsing, so the two views can never drift
apart. Rule applications append step lines to the source; text edits reparse.
Both share one snapshot-based undo history.

The render model is a flat span list over the printed last term of an item,
with semantic tags (binder links, paren pairs, redex markers) so that clients
never have to re-implement binding resolution.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Union

from .derivation import Action, Derivation, apply_action, build_environment
from .syntax import (
    DEFAULT_CONFIG,
    DocumentAst,
    DerivationItem,
    SourceSpan,
    SyntaxConfig,
    layout_term,
    parse_document,
    print_term,
)
from .terms import (
    Abs,
    App,
    BoundVar,
    CaptureReport,
    Environment,
    InvalidName,
    InvalidPath,
    NotARedex,
    NotARef,
    NotAnAbstraction,
    Rule,
    Step,
    Term,
    TermError,
    TermPath,
    UndefinedRef,
    WouldBindFree,
    WouldShadow,
    arity,
    enumerate_redexes,
)


class UnknownItem(Exception):
    pass


def path_str(path: TermPath) -> str:
    return ".".join(step.value for step in path)


def parse_path(text: str) -> TermPath:
    if text == "":
        return ()
    return tuple(Step(part) for part in text.split("."))


@dataclass(frozen=True)
class RenderSpan:
    start: int
    end: int
    tag: str
    ident: str
    defined: Optional[bool] = None
    path: Optional[str] = None  # on ref-site spans, the node's term path


@dataclass(frozen=True)
class RenderModel:
    text: str
    spans: tuple  # tuple[RenderSpan, ...], ordered by start position
    redex_count: int
    focused_redex: int
    normal_form: bool
    redex_paths: tuple = ()  # term path per redex, enumeration order


@dataclass(frozen=True)
class SessionSnapshot:
    source_text: str
    selection: Optional[str]
    focused_redex: int


@dataclass(frozen=True)
class Session:
    source_text: str
    config: SyntaxConfig
    doc: DocumentAst
    env: Environment
    diagnostics: tuple
    selection: Optional[str]
    focused_redex: int
    undo_stack: tuple = ()
    redo_stack: tuple = ()


@dataclass(frozen=True)
class FocusRedex:
    delta: int


@dataclass(frozen=True)
class Undo:
    pass


@dataclass(frozen=True)
class Redo:
    pass


UiEvent = Union[Action, FocusRedex, Undo, Redo]


@dataclass(frozen=True)
class ActionWarning:
    code: str
    message: str
    captured: tuple = ()
    span: Optional[SourceSpan] = None


@dataclass(frozen=True)
class UiOutcome:
    session: Session
    model: Optional[RenderModel]
    source_edit: Optional[tuple]  # (SourceSpan, new text)
    warning: Optional[ActionWarning] = None


def _derive(source_text: str, config: SyntaxConfig) -> tuple:
    doc, diagnostics = parse_document(source_text, config)
    env, env_diags = build_environment(doc)
    return doc, env, tuple(diagnostics + env_diags)


def _item_id(item: DerivationItem, ordinal: int) -> str:
    return item.name if item.name else f"#{ordinal}"


def open_session(text: str, config: SyntaxConfig = DEFAULT_CONFIG) -> Session:
    doc, env, diagnostics = _derive(text, config)
    ids = [_item_id(item, i + 1) for i, item in enumerate(doc.items)]
    return Session(
        source_text=text,
        config=config,
        doc=doc,
        env=env,
        diagnostics=diagnostics,
        selection=ids[0] if ids else None,
        focused_redex=0,
    )


def outline(s: Session) -> list:
    return [
        (_item_id(item, i + 1), item.span) for i, item in enumerate(s.doc.items)
    ]


def _find_item(s: Session, item_id: str) -> DerivationItem:
    for i, item in enumerate(s.doc.items):
        if _item_id(item, i + 1) == item_id:
            return item
    raise UnknownItem(item_id)


def build_render_model(
    term: Term,
    env: Environment,
    config: SyntaxConfig,
    focused_redex: int = 0,
) -> RenderModel:
    """Render model for one term. Takes only that term: rendering an item is
    proportional to its last step, never to the whole derivation."""
    layout = layout_term(term, config)
    redexes = enumerate_redexes(term, env)
    binder_of = _resolve_occurrences(term)
    spans: list = []
    for tok in layout.tokens:
        if tok.kind == "binder":
            spans.append(RenderSpan(tok.start, tok.end, "binder-site", path_str(tok.path)))
        elif tok.kind == "bound":
            spans.append(
                RenderSpan(tok.start, tok.end, "bound-occ", path_str(binder_of[tok.path]))
            )
        elif tok.kind == "free":
            spans.append(RenderSpan(tok.start, tok.end, "free-occ", tok.name))
        elif tok.kind == "ref":
            spans.append(
                RenderSpan(
                    tok.start,
                    tok.end,
                    "ref-site",
                    tok.name,
                    defined=tok.name in env,
                    path=path_str(tok.path),
                )
            )
        elif tok.kind == "paren_open":
            spans.append(RenderSpan(tok.start, tok.end, "paren-open", str(tok.pair)))
        elif tok.kind == "paren_close":
            spans.append(RenderSpan(tok.start, tok.end, "paren-close", str(tok.pair)))
    for index, info in enumerate(redexes):
        fun_span = layout.node_spans[info.path + (Step.FUN,)]
        arg_span = layout.node_spans[info.path + (Step.ARG,)]
        spans.append(RenderSpan(fun_span[0], fun_span[1], "redex-fun", str(index)))
        spans.append(RenderSpan(arg_span[0], arg_span[1], "redex-arg", str(index)))
    spans.sort(key=lambda sp: (sp.start, sp.end, sp.tag, sp.ident))
    count = len(redexes)
    return RenderModel(
        text=layout.text,
        spans=tuple(spans),
        redex_count=count,
        focused_redex=focused_redex % count if count else 0,
        normal_form=count == 0,
        redex_paths=tuple(path_str(info.path) for info in redexes),
    )


def _resolve_occurrences(term: Term) -> dict:
    """Map each bound-variable path to the path of its binding abstraction."""
    out: dict = {}

    def go(node: Term, path: TermPath, stack: tuple) -> None:
        if isinstance(node, BoundVar):
            out[path] = stack[node.index]
        elif isinstance(node, Abs):
            go(node.body, path + (Step.BODY,), (path,) + stack)
        elif isinstance(node, App):
            go(node.fun, path + (Step.FUN,), stack)
            go(node.arg, path + (Step.ARG,), stack)

    go(term, (), ())
    return out


def render(s: Session, item_id: str) -> RenderModel:
    item = _find_item(s, item_id)
    last = item.terms[-1][0]
    return build_render_model(last, s.env, s.config, s.focused_redex)


def _snapshot(s: Session) -> SessionSnapshot:
    return SessionSnapshot(s.source_text, s.selection, s.focused_redex)


def _restore(s: Session, snap: SessionSnapshot, undo_stack: tuple, redo_stack: tuple) -> Session:
    doc, env, diagnostics = _derive(snap.source_text, s.config)
    return Session(
        source_text=snap.source_text,
        config=s.config,
        doc=doc,
        env=env,
        diagnostics=diagnostics,
        selection=snap.selection,
        focused_redex=snap.focused_redex,
        undo_stack=undo_stack,
        redo_stack=redo_stack,
    )


def _offset_of(text: str, line: int, col: int) -> int:
    lines = text.split("\n")
    return sum(len(l) + 1 for l in lines[: line - 1]) + (col - 1)


def _span_offsets(text: str, span: SourceSpan) -> tuple:
    return (
        _offset_of(text, span.start_line, span.start_col),
        _offset_of(text, span.end_line, span.end_col),
    )


def _offset_to_linecol(text: str, offset: int) -> tuple:
    before = text[:offset]
    line = before.count("\n") + 1
    col = offset - (before.rfind("\n") + 1) + 1
    return line, col


def _step_edit(
    source_text: str, item: DerivationItem, additions: list, config: SyntaxConfig
) -> tuple:
    """Edit appending step lines just before the item's closing brace. Only
    the whitespace run before the brace is rewritten; every other byte of the
    item stays as the student wrote it."""
    _, item_end = _span_offsets(source_text, item.span)
    brace = item_end - 1
    assert source_text[brace] == "}"
    ws_start = brace
    while ws_start > 0 and source_text[ws_start - 1] in " \t\r\n":
        ws_start -= 1
    lines = "".join(
        f"  {config.arrow_text(rule)} {print_term(term, config)}\n"
        for rule, term in additions
    )
    new_text = "\n" + lines
    start_line, start_col = _offset_to_linecol(source_text, ws_start)
    end_line, end_col = _offset_to_linecol(source_text, brace)
    return SourceSpan(start_line, start_col, end_line, end_col), new_text


def _splice(text: str, span: SourceSpan, new_text: str) -> str:
    start, end = _span_offsets(text, span)
    return text[:start] + new_text + text[end:]


def _warning_from(exc: Exception) -> ActionWarning:
    code = {
        WouldBindFree: "would_bind_free",
        WouldShadow: "would_shadow",
        InvalidName: "invalid_name",
        NotARedex: "not_a_redex",
        NotARef: "not_a_ref",
        NotAnAbstraction: "not_an_abstraction",
        UndefinedRef: "undefined_ref",
        InvalidPath: "invalid_path",
    }.get(type(exc), "rule_error")
    return ActionWarning(code=code, message=str(exc))


def _capture_warning(report: CaptureReport) -> ActionWarning:
    names = ", ".join(sorted(report.captured))
    return ActionWarning(
        code="capture",
        message=f"refused: {names} would become bound",
        captured=tuple(sorted(report.captured)),
    )


def ui_action(s: Session, item_id: str, event: UiEvent) -> UiOutcome:
    """One manipulation-view interaction. Rule refusals come back as warnings
    with the session unchanged; successful rule applications append step
    lines to the source text and push an undo snapshot."""
    if isinstance(event, FocusRedex):
        model = render(s, item_id)
        if model.redex_count:
            focus = (s.focused_redex + event.delta) % model.redex_count
        else:
            focus = 0
        s2 = replace(s, focused_redex=focus)
        return UiOutcome(s2, render(s2, item_id), None)
    if isinstance(event, Undo):
        if not s.undo_stack:
            return UiOutcome(s, _render_or_none(s, item_id), None, ActionWarning("nothing_to_undo", "nothing to undo"))
        prev = s.undo_stack[-1]
        s2 = _restore(s, prev, s.undo_stack[:-1], s.redo_stack + (_snapshot(s),))
        return UiOutcome(s2, _render_or_none(s2, item_id), None)
    if isinstance(event, Redo):
        if not s.redo_stack:
            return UiOutcome(s, _render_or_none(s, item_id), None, ActionWarning("nothing_to_redo", "nothing to redo"))
        nxt = s.redo_stack[-1]
        s2 = _restore(s, nxt, s.undo_stack + (_snapshot(s),), s.redo_stack[:-1])
        return UiOutcome(s2, _render_or_none(s2, item_id), None)

    item = _find_item(s, item_id)
    deriv = Derivation(item.name, tuple(t for t, _ in item.terms), item.arrows)
    try:
        result = apply_action(deriv, event, s.env)
    except TermError as exc:
        return UiOutcome(s, render(s, item_id), None, _warning_from(exc))
    if isinstance(result, CaptureReport):
        return UiOutcome(s, render(s, item_id), None, _capture_warning(result))
    additions = list(zip(result.rules[len(deriv.rules):], result.steps[len(deriv.steps):]))
    edit_span, fragment = _step_edit(s.source_text, item, additions, s.config)
    new_source = _splice(s.source_text, edit_span, fragment)
    doc, env, diagnostics = _derive(new_source, s.config)
    s2 = Session(
        source_text=new_source,
        config=s.config,
        doc=doc,
        env=env,
        diagnostics=diagnostics,
        selection=s.selection,
        focused_redex=0,
        undo_stack=s.undo_stack + (_snapshot(s),),
        redo_stack=(),
    )
    return UiOutcome(s2, render(s2, item_id), (edit_span, fragment))


def _render_or_none(s: Session, item_id: str) -> Optional[RenderModel]:
    try:
        return render(s, item_id)
    except UnknownItem:
        return None


def edit_text(s: Session, span: SourceSpan, new_text: str) -> Session:
    """Replace a span of the source, reparse everything, keep the selection
    when its item still parses, and push an undo snapshot."""
    new_source = _splice(s.source_text, span, new_text)
    doc, env, diagnostics = _derive(new_source, s.config)
    ids = [_item_id(item, i + 1) for i, item in enumerate(doc.items)]
    if s.selection in ids:
        selection = s.selection
    else:
        selection = ids[0] if ids else None
    return Session(
        source_text=new_source,
        config=s.config,
        doc=doc,
        env=env,
        diagnostics=diagnostics,
        selection=selection,
        focused_redex=0,
        undo_stack=s.undo_stack + (_snapshot(s),),
        redo_stack=(),
    )


def hover_info(s: Session, item_id: str, position: int) -> Optional[tuple]:
    """Tooltip payload when `position` (an offset into the rendered term
    text) falls on a defined named-term reference."""
    try:
        model = render(s, item_id)
    except UnknownItem:
        return None
    for span in model.spans:
        if span.tag == "ref-site" and span.start <= position < span.end and span.defined:
            definition = s.env.definition(span.ident)
            return print_term(definition, s.config), arity(definition)
    return None


class CompletionKind(Enum):
    NAMED_TERM = "named_term"
    RULE_ARROW = "rule_arrow"


def completions(s: Session, prefix: str) -> list:
    """Named terms from the current parse plus the three rule arrows, filtered
    by prefix. A freshly defined name shows up immediately."""
    out = [
        (name, CompletionKind.NAMED_TERM)
        for name in s.env.names()
        if name.startswith(prefix)
    ]
    for rule in (Rule.ALPHA, Rule.BETA, Rule.EQUIV):
        label = s.config.arrow_text(rule)
        if label.startswith(prefix):
            out.append((label, CompletionKind.RULE_ARROW))
    return out
