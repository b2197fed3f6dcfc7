"""Configurable lexer, parser, and printer for terms and `.lam` documents.

A document is a sequence of items: `Name := { term (-> rule term)* }` for
named terms, the same without the leading `Name :=` for unnamed ones. The
lambda spelling, binding delimiters, and rule-arrow spellings all come from a
SyntaxConfig. Parsing is total: bad input produces diagnostics with 1-based
line/column spans, never an unhandled crash, and items after a broken one are
still parsed.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from enum import Enum
from functools import lru_cache
from typing import NamedTuple, Optional

from .terms import (
    Abs,
    App,
    BoundVar,
    FreeVar,
    Ref,
    Rule,
    Step,
    Term,
    TermPath,
)

_IDENT_RE = re.compile(r"[A-Za-z][A-Za-z0-9_']*")


def _ident_initial(s: str) -> bool:
    # only ASCII identifier characters clash with variable tokens
    return bool(re.match(r"[A-Za-z0-9]", s))


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class SyntaxConfig:
    """Spelling and delimiter choices. The first spelling in each list is the
    canonical one the printer emits."""

    lambda_spellings: tuple = ("λ", "\\", "\\lambda")
    binding_delimiter: str = "."
    multi_binding_delimiter: str = ","
    arrow_prefix: str = "->"
    alpha_spellings: tuple = ("α", "\\alpha")
    beta_spellings: tuple = ("β", "\\beta")
    equiv_spellings: tuple = ("≡", "\\equiv")

    def __post_init__(self) -> None:
        object.__setattr__(self, "lambda_spellings", tuple(self.lambda_spellings))
        object.__setattr__(self, "alpha_spellings", tuple(self.alpha_spellings))
        object.__setattr__(self, "beta_spellings", tuple(self.beta_spellings))
        object.__setattr__(self, "equiv_spellings", tuple(self.equiv_spellings))
        self._validate()

    def _validate(self) -> None:
        for label, spellings in (
            ("lambda_spellings", self.lambda_spellings),
            ("alpha_spellings", self.alpha_spellings),
            ("beta_spellings", self.beta_spellings),
            ("equiv_spellings", self.equiv_spellings),
        ):
            if not spellings:
                raise ConfigError(f"{label} must not be empty")
            for s in spellings:
                if not s or s != s.strip() or "\n" in s or "\r" in s:
                    raise ConfigError(f"bad spelling {s!r} in {label}")
                if _ident_initial(s):
                    # would glue onto identifiers and make tokenization ambiguous
                    raise ConfigError(
                        f"spelling {s!r} in {label} starts with an identifier character"
                    )
        if not self.arrow_prefix or _ident_initial(self.arrow_prefix) or "\n" in self.arrow_prefix:
            raise ConfigError(f"bad arrow prefix {self.arrow_prefix!r}")
        if (
            not self.binding_delimiter
            or self.binding_delimiter.strip() == ""
            or "\n" in self.binding_delimiter
        ):
            raise ConfigError("binding delimiter must be non-blank")
        if _ident_initial(self.binding_delimiter):
            raise ConfigError("binding delimiter must not start with an identifier character")
        multi = self.multi_binding_delimiter
        if multi.strip() == "":
            if multi == "":
                raise ConfigError("multi-binding delimiter must not be empty")
            # whitespace mode: binders are separated by plain spaces
        else:
            if multi == self.binding_delimiter:
                raise ConfigError("binding and multi-binding delimiters must differ")
            if _ident_initial(multi):
                raise ConfigError(
                    "multi-binding delimiter must not start with an identifier character"
                )
        for bad in "{}()":
            if bad in self.binding_delimiter or bad in multi:
                raise ConfigError("delimiters must not contain braces or parentheses")

    @property
    def whitespace_multi_binding(self) -> bool:
        return self.multi_binding_delimiter.strip() == ""

    def rule_spellings(self, rule: Rule) -> tuple:
        return {
            Rule.ALPHA: self.alpha_spellings,
            Rule.BETA: self.beta_spellings,
            Rule.EQUIV: self.equiv_spellings,
        }[rule]

    def arrow_text(self, rule: Rule) -> str:
        return self.arrow_prefix + self.rule_spellings(rule)[0]


DEFAULT_CONFIG = SyntaxConfig()


@dataclass(frozen=True)
class SourceSpan:
    """1-based positions, columns in code points, end exclusive."""

    start_line: int
    start_col: int
    end_line: int
    end_col: int

    def __post_init__(self) -> None:
        if (self.start_line, self.start_col) > (self.end_line, self.end_col):
            raise ValueError("span start after end")


class Severity(Enum):
    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True)
class Diagnostic:
    severity: Severity
    span: SourceSpan
    message: str
    code: str


@dataclass(frozen=True)
class DerivationItem:
    """One `{ ... }` block: an optional name, its terms, and the rule arrows
    between consecutive terms."""

    name: Optional[str]
    terms: tuple  # tuple[tuple[Term, SourceSpan], ...]
    arrows: tuple  # tuple[Rule, ...], len == len(terms) - 1
    span: SourceSpan


@dataclass(frozen=True)
class DocumentAst:
    items: tuple  # tuple[DerivationItem, ...]


class ParseError(Exception):
    def __init__(self, diagnostics: list):
        first = diagnostics[0]
        super().__init__(
            f"{first.span.start_line}:{first.span.start_col}: {first.message}"
        )
        self.diagnostics = list(diagnostics)


# --- lexer -----------------------------------------------------------------


class _Tok(Enum):
    LBRACE = "{"
    RBRACE = "}"
    LPAREN = "("
    RPAREN = ")"
    LAMBDA = "lambda"
    BIND = "bind"
    MULTI = "multi"
    ARROW = "arrow"
    DEFINE = ":="
    VAR = "var"
    REF = "ref"
    EOF = "eof"


class _Token(NamedTuple):
    kind: _Tok
    text: str
    span: SourceSpan
    rule: Optional[Rule] = None


_BLANK_RE = re.compile(r"[ \t\r\n]*")


@lru_cache(maxsize=16)
def _token_table(config: SyntaxConfig) -> tuple:
    """(compiled regex of all fixed tokens, spelling -> (kind, rule))."""
    fixed: dict = {}
    for rule in (Rule.ALPHA, Rule.BETA, Rule.EQUIV):
        for s in config.rule_spellings(rule):
            fixed[config.arrow_prefix + s] = (_Tok.ARROW, rule)
    fixed[":="] = (_Tok.DEFINE, None)
    for s in config.lambda_spellings:
        fixed.setdefault(s, (_Tok.LAMBDA, None))
    for text, kind in (
        ("{", _Tok.LBRACE),
        ("}", _Tok.RBRACE),
        ("(", _Tok.LPAREN),
        (")", _Tok.RPAREN),
        (config.binding_delimiter, _Tok.BIND),
    ):
        fixed.setdefault(text, (kind, None))
    if not config.whitespace_multi_binding:
        fixed.setdefault(config.multi_binding_delimiter, (_Tok.MULTI, None))
    # longest first so "\lambda" wins over "\" and "->β" over any "-"
    ordered = sorted(fixed, key=len, reverse=True)
    pattern = re.compile("|".join(re.escape(t) for t in ordered))
    return pattern, fixed


class _Lexer:
    def __init__(self, text: str, config: SyntaxConfig):
        self.text = text
        self.config = config
        self.pos = 0
        self.line = 1
        self.col = 1
        self.diagnostics: list = []
        self.fixed_re, self.fixed = _token_table(config)

    def _advance(self, n: int) -> None:
        seg = self.text[self.pos : self.pos + n]
        newlines = seg.count("\n")
        if newlines:
            self.line += newlines
            self.col = n - seg.rfind("\n")
        else:
            self.col += n
        self.pos += n

    def _at_line_start(self) -> bool:
        # comments are only recognised on lines of their own
        i = self.pos - (self.col - 1)
        return self.text[i : self.pos].strip() == ""

    def tokens(self) -> list:
        out: list = []
        text = self.text
        size = len(text)
        fixed_match = self.fixed_re.match
        ident_match = _IDENT_RE.match
        blank_match = _BLANK_RE.match
        while True:
            # skip whitespace and full-line comments
            while True:
                end = blank_match(text, self.pos).end()
                if end > self.pos:
                    self._advance(end - self.pos)
                if (
                    self.pos < size
                    and text[self.pos] == "-"
                    and text.startswith("--", self.pos)
                    and self._at_line_start()
                ):
                    stop = text.find("\n", self.pos)
                    self._advance((stop if stop != -1 else size) - self.pos)
                else:
                    break
            if self.pos >= size:
                here = SourceSpan(self.line, self.col, self.line, self.col)
                out.append(_Token(_Tok.EOF, "", here))
                return out
            line, col = self.line, self.col
            m = fixed_match(text, self.pos)
            if m:
                word = m.group(0)
                kind, rule = self.fixed[word]
                n = len(word)
                self.pos += n
                self.col += n  # fixed tokens never contain newlines
                out.append(
                    _Token(kind, word, SourceSpan(line, col, self.line, self.col), rule)
                )
                continue
            m = ident_match(text, self.pos)
            if m:
                word = m.group(0)
                n = len(word)
                self.pos += n
                self.col += n
                kind = _Tok.REF if word[0].isupper() else _Tok.VAR
                out.append(
                    _Token(kind, word, SourceSpan(line, col, self.line, self.col), None)
                )
                continue
            if text.startswith(self.config.arrow_prefix, self.pos):
                self._advance(len(self.config.arrow_prefix))
                span = SourceSpan(line, col, self.line, self.col)
                self.diagnostics.append(
                    Diagnostic(Severity.ERROR, span, "unknown rule arrow", "bad_arrow")
                )
                continue
            ch = text[self.pos]
            self._advance(1)
            span = SourceSpan(line, col, self.line, self.col)
            self.diagnostics.append(
                Diagnostic(
                    Severity.ERROR, span, f"unexpected character {ch!r}", "unexpected_token"
                )
            )


# --- parser ----------------------------------------------------------------


class _ItemFailed(Exception):
    pass


class _Parser:
    def __init__(self, text: str, config: SyntaxConfig):
        lexer = _Lexer(text, config)
        self.toks = lexer.tokens()
        self.diagnostics = lexer.diagnostics
        self.config = config
        self.i = 0

    def peek(self, ahead: int = 0) -> _Token:
        i = self.i + ahead
        toks = self.toks
        return toks[i] if i < len(toks) else toks[-1]

    def take(self) -> _Token:
        tok = self.toks[self.i]
        if tok.kind is not _Tok.EOF:
            self.i += 1
        return tok

    def fail(self, span: SourceSpan, message: str, code: str):
        self.diagnostics.append(Diagnostic(Severity.ERROR, span, message, code))
        raise _ItemFailed()

    # terms

    def parse_term(self, binders: tuple) -> tuple:
        tok = self.peek()
        if tok.kind is _Tok.LAMBDA:
            return self.parse_abs(binders)
        return self.parse_app(binders)

    def parse_abs(self, binders: tuple) -> tuple:
        lam = self.take()
        names: list = []
        tok = self.peek()
        if tok.kind is _Tok.REF:
            self.fail(tok.span, f"illegal variable name {tok.text!r} (upper-case initial)", "illegal_name")
        if tok.kind is not _Tok.VAR:
            self.fail(_join(lam.span, tok.span), "empty binder list", "empty_binder")
        names.append(self.take())
        while True:
            nxt = self.peek()
            if self.config.whitespace_multi_binding:
                if nxt.kind is _Tok.VAR:
                    names.append(self.take())
                    continue
                if nxt.kind is _Tok.REF:
                    self.fail(nxt.span, f"illegal variable name {nxt.text!r} (upper-case initial)", "illegal_name")
                break
            if nxt.kind is _Tok.MULTI:
                multi = self.take()
                after = self.peek()
                if after.kind is _Tok.REF:
                    self.fail(after.span, f"illegal variable name {after.text!r} (upper-case initial)", "illegal_name")
                if after.kind is not _Tok.VAR:
                    self.fail(multi.span, f"dangling {multi.text!r} with no binder after it", "dangling_delimiter")
                names.append(self.take())
                continue
            break
        tok = self.peek()
        if tok.kind is not _Tok.BIND:
            self.fail(
                _join(lam.span, names[-1].span),
                "empty body after binder",
                "empty_body",
            )
        self.take()
        body_tok = self.peek()
        if body_tok.kind in (_Tok.RBRACE, _Tok.ARROW, _Tok.EOF, _Tok.RPAREN):
            self.fail(
                _join(lam.span, tok.span),
                f"dangling {self.config.binding_delimiter!r} with no body",
                "dangling_delimiter",
            )
        inner = binders
        for name in names:
            inner = (name.text,) + inner
        body, body_span = self.parse_term(inner)
        term: Term = body
        for name in reversed(names):
            term = Abs(name.text, term)
        return term, _join(lam.span, body_span)

    def parse_app(self, binders: tuple) -> tuple:
        parts: list = []
        while True:
            tok = self.peek()
            if tok.kind in (_Tok.VAR, _Tok.REF, _Tok.LPAREN):
                parts.append(self.parse_atom(binders))
            elif tok.kind is _Tok.LAMBDA and parts:
                # trailing abstraction binds as far as possible: f λx. x
                parts.append(self.parse_abs(binders))
                break
            else:
                break
        if not parts:
            tok = self.peek()
            self.fail(tok.span, f"expected a term, found {tok.text or 'end of input'!r}", "unexpected_token")
        term, span = parts[0]
        for sub, sub_span in parts[1:]:
            term = App(term, sub)
            span = _join(span, sub_span)
        return term, span

    def parse_atom(self, binders: tuple) -> tuple:
        tok = self.take()
        if tok.kind is _Tok.VAR:
            try:
                index = binders.index(tok.text)
                return BoundVar(index, tok.text), tok.span
            except ValueError:
                return FreeVar(tok.text), tok.span
        if tok.kind is _Tok.REF:
            return Ref(tok.text), tok.span
        if tok.kind is _Tok.LPAREN:
            term, _ = self.parse_term(binders)
            closing = self.peek()
            if closing.kind is not _Tok.RPAREN:
                self.fail(tok.span, "unbalanced parenthesis", "unbalanced_paren")
            self.take()
            return term, _join(tok.span, closing.span)
        raise AssertionError("parse_atom called on a non-atom token")

    # documents

    def parse_document(self) -> DocumentAst:
        items: list = []
        while self.peek().kind is not _Tok.EOF:
            start_i = self.i
            try:
                items.append(self.parse_item())
            except _ItemFailed:
                self.resync(start_i)
        return DocumentAst(tuple(items))

    def parse_item(self) -> DerivationItem:
        name = None
        first = self.peek()
        if first.kind is _Tok.REF and self.peek(1).kind is _Tok.DEFINE:
            name = self.take().text
            self.take()
        opening = self.peek()
        if opening.kind is not _Tok.LBRACE:
            self.fail(
                opening.span,
                f"expected '{{', found {opening.text or 'end of input'!r}",
                "unexpected_token",
            )
        self.take()
        terms = [self.parse_term(())]
        arrows: list = []
        while True:
            tok = self.peek()
            if tok.kind is _Tok.ARROW:
                self.take()
                arrows.append(tok.rule)
                terms.append(self.parse_term(()))
            elif tok.kind is _Tok.RBRACE:
                closing = self.take()
                span = _join(first.span, closing.span)
                return DerivationItem(name, tuple(terms), tuple(arrows), span)
            elif tok.kind is _Tok.EOF:
                self.fail(_join(first.span, opening.span), "item is never closed with '}'", "unbalanced_brace")
            else:
                self.fail(tok.span, f"unexpected {tok.text!r} inside item", "unexpected_token")

    def resync(self, failed_from: int) -> None:
        # skip to just after the next '}', or to the next `Name :=`, and resume
        self.i = max(self.i, failed_from + 1)
        while True:
            tok = self.peek()
            if tok.kind is _Tok.EOF:
                return
            if tok.kind is _Tok.RBRACE:
                self.take()
                return
            if tok.kind is _Tok.REF and self.peek(1).kind is _Tok.DEFINE:
                return
            self.take()


def _join(a: SourceSpan, b: SourceSpan) -> SourceSpan:
    # every call site passes a textually before b
    return SourceSpan(a.start_line, a.start_col, b.end_line, b.end_col)


def parse_term(text: str, config: SyntaxConfig = DEFAULT_CONFIG) -> Term:
    """Parse a single term; raises ParseError carrying diagnostics."""
    parser = _Parser(text, config)
    try:
        term, _ = parser.parse_term(())
        trailing = parser.peek()
        if trailing.kind is not _Tok.EOF:
            parser.fail(
                trailing.span, f"unexpected {trailing.text!r} after term", "unexpected_token"
            )
    except _ItemFailed:
        raise ParseError(parser.diagnostics) from None
    if parser.diagnostics:
        raise ParseError(parser.diagnostics)
    return term


def parse_document(
    text: str, config: SyntaxConfig = DEFAULT_CONFIG
) -> tuple:
    """Parse a `.lam` document: (DocumentAst, diagnostics). Items that fail to
    parse are skipped; parsing resumes at the next `}` or `Name :=`."""
    parser = _Parser(text, config)
    doc = parser.parse_document()
    return doc, parser.diagnostics


# --- printer ----------------------------------------------------------------


@dataclass(frozen=True)
class LayoutToken:
    start: int
    end: int
    kind: str  # binder | bound | free | ref | paren_open | paren_close
    path: Optional[TermPath] = None
    pair: Optional[int] = None
    name: Optional[str] = None


@dataclass
class TermLayout:
    text: str
    node_spans: dict  # TermPath -> (start, end), parens included
    tokens: list


def layout_term(t: Term, config: SyntaxConfig = DEFAULT_CONFIG) -> TermLayout:
    """Render t to text, recording where every node and token landed."""
    parts: list = []
    pos = 0
    tokens: list = []
    node_spans: dict = {}
    pair_counter = [0]

    def emit(s: str) -> int:
        nonlocal pos
        parts.append(s)
        start = pos
        pos += len(s)
        return start

    def go(node: Term, path: TermPath, ctx: str) -> None:
        needs_parens = (isinstance(node, Abs) and ctx in ("fun", "arg")) or (
            isinstance(node, App) and ctx == "arg"
        )
        start = pos
        if needs_parens:
            pair = pair_counter[0]
            pair_counter[0] += 1
            open_at = emit("(")
            tokens.append(LayoutToken(open_at, open_at + 1, "paren_open", pair=pair))
        if isinstance(node, BoundVar):
            at = emit(node.hint)
            tokens.append(LayoutToken(at, pos, "bound", path=path, name=node.hint))
        elif isinstance(node, FreeVar):
            at = emit(node.name)
            tokens.append(LayoutToken(at, pos, "free", path=path, name=node.name))
        elif isinstance(node, Ref):
            at = emit(node.name)
            tokens.append(LayoutToken(at, pos, "ref", path=path, name=node.name))
        elif isinstance(node, Abs):
            at = emit(config.lambda_spellings[0])
            emit(node.binder)
            tokens.append(LayoutToken(at, pos, "binder", path=path, name=node.binder))
            emit(config.binding_delimiter)
            emit(" ")
            go(node.body, path + (Step.BODY,), "top")
        elif isinstance(node, App):
            go(node.fun, path + (Step.FUN,), "fun")
            emit(" ")
            go(node.arg, path + (Step.ARG,), "arg")
        if needs_parens:
            close_at = emit(")")
            tokens.append(LayoutToken(close_at, close_at + 1, "paren_close", pair=pair))
        node_spans[path] = (start, pos)

    go(t, (), "top")
    return TermLayout("".join(parts), node_spans, tokens)


def print_term(t: Term, config: SyntaxConfig = DEFAULT_CONFIG) -> str:
    """Canonical single-line form: first configured lambda spelling, minimal
    parentheses, verbatim hints. parse_term(print_term(t)) == t.

    Same text as layout_term(t, config).text without the span bookkeeping.
    """
    lam = config.lambda_spellings[0]
    delim = config.binding_delimiter
    parts: list = []
    append = parts.append

    def go(node: Term, ctx: str) -> None:
        if isinstance(node, BoundVar):
            append(node.hint)
        elif isinstance(node, FreeVar):
            append(node.name)
        elif isinstance(node, Ref):
            append(node.name)
        elif isinstance(node, Abs):
            wrap = ctx != "top"
            if wrap:
                append("(")
            append(lam)
            append(node.binder)
            append(delim)
            append(" ")
            go(node.body, "top")
            if wrap:
                append(")")
        else:
            wrap = ctx == "arg"
            if wrap:
                append("(")
            go(node.fun, "fun")
            append(" ")
            go(node.arg, "arg")
            if wrap:
                append(")")

    go(t, "top")
    return "".join(parts)


def print_document(doc: DocumentAst, config: SyntaxConfig = DEFAULT_CONFIG) -> str:
    blocks = []
    for item in doc.items:
        head = f"{item.name} := {{" if item.name else "{"
        lines = [head, "  " + print_term(item.terms[0][0], config)]
        for rule, (term, _) in zip(item.arrows, item.terms[1:]):
            lines.append(f"  {config.arrow_text(rule)} {print_term(term, config)}")
        lines.append("}")
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + ("\n" if blocks else "")


def rewrite_keywords(text: str, config: SyntaxConfig = DEFAULT_CONFIG) -> list:
    """Display-layer substitutions: spans of every non-canonical spelling with
    its canonical replacement. The text itself is never modified."""
    table: list = []
    for spellings in (
        config.lambda_spellings,
        config.alpha_spellings,
        config.beta_spellings,
        config.equiv_spellings,
    ):
        canonical = spellings[0]
        for s in spellings[1:]:
            table.append((s, canonical))
    table.sort(key=lambda e: -len(e[0]))

    out: list = []
    line, col, i = 1, 1, 0
    while i < len(text):
        hit = None
        for spelling, replacement in table:
            if text.startswith(spelling, i):
                hit = (spelling, replacement)
                break
        if hit is None:
            if text[i] == "\n":
                line += 1
                col = 1
            else:
                col += 1
            i += 1
            continue
        spelling, replacement = hit
        end_line, end_col = line, col
        for ch in spelling:
            if ch == "\n":
                end_line += 1
                end_col = 1
            else:
                end_col += 1
        out.append((SourceSpan(line, col, end_line, end_col), replacement))
        line, col = end_line, end_col
        i += len(spelling)
    return out


# --- config files -----------------------------------------------------------

DEFAULT_CONFIG_PATH = "lambda-lab.cfg"

_LIST_KEYS = {
    "lambda_spellings",
    "alpha_spellings",
    "beta_spellings",
    "equiv_spellings",
}
_SCALAR_KEYS = {"binding_delimiter", "multi_binding_delimiter", "arrow_prefix"}


def _unquote(value: str) -> str:
    value = value.strip()
    if len(value) >= 2 and value[0] == value[-1] and value[0] in "\"'":
        return value[1:-1]
    return value


def parse_config(text: str) -> SyntaxConfig:
    """Flat `key = value` form; list values comma-separated. The value
    `whitespace` (or a quoted space) selects whitespace multi-binding."""
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#") or line.startswith("--"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key = key.strip()
        if key in _LIST_KEYS:
            items = tuple(_unquote(v) for v in value.split(",") if _unquote(v))
            if not items:
                raise ConfigError(f"line {lineno}: {key} needs at least one entry")
            values[key] = items
        elif key in _SCALAR_KEYS:
            v = _unquote(value)
            if key == "multi_binding_delimiter" and v == "whitespace":
                v = " "
            values[key] = v
        else:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
    try:
        return replace(DEFAULT_CONFIG, **values) if values else DEFAULT_CONFIG
    except ConfigError:
        raise
    except Exception as exc:  # dataclass replace re-runs validation
        raise ConfigError(str(exc)) from exc


def load_config(path: str) -> SyntaxConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
