"""Lambda terms and the three rewrite rules (alpha, beta, expansion).

Bound variables are stored as De Bruijn distances plus the surface name the
student wrote (the hint). Indices decide binding; hints decide what gets
printed. Every operation either preserves the property that printing and
re-parsing reproduces the term exactly, or refuses with a report instead of
renaming anything behind the student's back.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Mapping, Optional, Union

VAR_NAME_RE = re.compile(r"[a-z][a-zA-Z0-9_']*\Z")
DEF_NAME_RE = re.compile(r"[A-Z][a-zA-Z0-9_']*\Z")


class Step(Enum):
    """One move into a subterm: function side, argument side, or under a binder."""

    FUN = "fun"
    ARG = "arg"
    BODY = "body"


TermPath = tuple  # tuple[Step, ...]; () addresses the whole term


@dataclass(frozen=True)
class BoundVar:
    """Variable bound by the index-th enclosing abstraction; hint is display-only."""

    index: int
    hint: str


@dataclass(frozen=True)
class FreeVar:
    name: str


@dataclass(frozen=True)
class Abs:
    binder: str
    body: "Term"


@dataclass(frozen=True)
class App:
    fun: "Term"
    arg: "Term"


@dataclass(frozen=True)
class Ref:
    """Reference to a named term; uppercase initial distinguishes it from variables."""

    name: str


Term = Union[BoundVar, FreeVar, Abs, App, Ref]


class Rule(Enum):
    ALPHA = "alpha"
    BETA = "beta"
    EQUIV = "equiv"


class RedexKind(Enum):
    DIRECT = "direct"
    VIA_EXPANSION = "via-expansion"


@dataclass(frozen=True)
class RedexInfo:
    """A reducible application: either the function is an abstraction, or it is
    a reference whose definition chain ends in one (ref_chain lists the names)."""

    path: TermPath
    kind: RedexKind
    ref_chain: tuple = ()


@dataclass(frozen=True)
class CaptureReport:
    """Names that would silently change binding if the rule were applied."""

    captured: frozenset
    site: TermPath


class TermError(Exception):
    pass


class InvalidPath(TermError):
    pass


class NotARedex(TermError):
    pass


class NotARef(TermError):
    pass


class NotAnAbstraction(TermError):
    pass


class UndefinedRef(TermError):
    def __init__(self, name: str):
        super().__init__(f"undefined named term: {name}")
        self.name = name


class InvalidName(TermError):
    def __init__(self, name: str):
        super().__init__(f"not a legal variable name: {name!r}")
        self.name = name


class WouldBindFree(TermError):
    def __init__(self, name: str):
        super().__init__(f"renaming would bind the free variable {name!r}")
        self.name = name


class WouldShadow(TermError):
    def __init__(self, name: str):
        super().__init__(f"renaming to {name!r} would shadow an inner binder")
        self.name = name


class CyclicDefinitions(TermError):
    def __init__(self, names: tuple):
        super().__init__("cyclic definitions: " + ", ".join(names))
        self.names = names


def refs_in(t: Term) -> frozenset:
    """All reference names occurring anywhere in t."""
    out: set = set()
    stack = [t]
    while stack:
        node = stack.pop()
        if isinstance(node, Ref):
            out.add(node.name)
        elif isinstance(node, Abs):
            stack.append(node.body)
        elif isinstance(node, App):
            stack.append(node.fun)
            stack.append(node.arg)
    return frozenset(out)


def definition_cycles(defs: Mapping[str, Term]) -> list:
    """Cycles in the reference graph of a definition set.

    Edge A -> B whenever the definition of A mentions B (anywhere, not just in
    head position) and B is itself defined. Returns one name tuple per cycle,
    deterministically ordered.
    """
    graph = {
        name: sorted(n for n in refs_in(body) if n in defs)
        for name, body in defs.items()
    }
    index: dict = {}
    low: dict = {}
    on_stack: set = set()
    scc_stack: list = []
    counter = [0]
    cycles: list = []

    def strongconnect(v: str) -> None:
        index[v] = low[v] = counter[0]
        counter[0] += 1
        scc_stack.append(v)
        on_stack.add(v)
        for w in graph[v]:
            if w not in index:
                strongconnect(w)
                low[v] = min(low[v], low[w])
            elif w in on_stack:
                low[v] = min(low[v], index[w])
        if low[v] == index[v]:
            comp = []
            while True:
                w = scc_stack.pop()
                on_stack.discard(w)
                comp.append(w)
                if w == v:
                    break
            if len(comp) > 1 or v in graph[v]:
                cycles.append(tuple(sorted(comp)))

    for name in sorted(graph):
        if name not in index:
            strongconnect(name)
    return sorted(cycles)


class Environment:
    """Named-term definitions, in document order. Construction rejects cycles
    so that following a definition chain always terminates."""

    def __init__(self, defs: Union[Mapping[str, Term], list, tuple] = ()):
        self._defs: dict = dict(defs)
        for name in self._defs:
            if not DEF_NAME_RE.match(name):
                raise InvalidName(name)
        cycles = definition_cycles(self._defs)
        if cycles:
            raise CyclicDefinitions(cycles[0])

    def __contains__(self, name: str) -> bool:
        return name in self._defs

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Environment) and self._defs == other._defs

    def __len__(self) -> int:
        return len(self._defs)

    def get(self, name: str) -> Optional[Term]:
        return self._defs.get(name)

    def definition(self, name: str) -> Term:
        try:
            return self._defs[name]
        except KeyError:
            raise UndefinedRef(name) from None

    def arity_of(self, name: str) -> int:
        return arity(self.definition(name))

    def names(self) -> tuple:
        return tuple(self._defs)

    def resolve_chain(self, name: str) -> Optional[tuple]:
        """Follow definitions while they are bare references.

        Returns (chain of names followed, final definition) or None when the
        chain runs into an undefined name.
        """
        chain = []
        cur = name
        while True:
            body = self._defs.get(cur)
            if body is None:
                return None
            chain.append(cur)
            if isinstance(body, Ref):
                cur = body.name
                continue
            return tuple(chain), body


EMPTY_ENV = Environment()


def free_vars(t: Term) -> frozenset:
    """Free variable names of t. References contribute nothing; their
    definitions are not consulted."""
    out: set = set()

    def go(node: Term, depth: int) -> None:
        if isinstance(node, FreeVar):
            out.add(node.name)
        elif isinstance(node, Abs):
            go(node.body, depth + 1)
        elif isinstance(node, App):
            go(node.fun, depth)
            go(node.arg, depth)

    go(t, 0)
    return frozenset(out)


def _free_names_rel(t: Term, depth: int = 0) -> set:
    """Names that occur free *relative to t itself*: free variables plus the
    hints of bound variables that escape t (their binder lies outside)."""
    out: set = set()

    def go(node: Term, d: int) -> None:
        if isinstance(node, FreeVar):
            out.add(node.name)
        elif isinstance(node, BoundVar):
            if node.index >= d:
                out.add(node.hint)
        elif isinstance(node, Abs):
            go(node.body, d + 1)
        elif isinstance(node, App):
            go(node.fun, d)
            go(node.arg, d)

    go(t, depth)
    return out


def alpha_eq(a: Term, b: Term) -> bool:
    """Structural equality ignoring binder names and hints."""
    if isinstance(a, BoundVar) and isinstance(b, BoundVar):
        return a.index == b.index
    if isinstance(a, FreeVar) and isinstance(b, FreeVar):
        return a.name == b.name
    if isinstance(a, Ref) and isinstance(b, Ref):
        return a.name == b.name
    if isinstance(a, Abs) and isinstance(b, Abs):
        return alpha_eq(a.body, b.body)
    if isinstance(a, App) and isinstance(b, App):
        return alpha_eq(a.fun, b.fun) and alpha_eq(a.arg, b.arg)
    return False


def subterm_at(t: Term, path: TermPath) -> Term:
    node = t
    for step in path:
        if step is Step.BODY and isinstance(node, Abs):
            node = node.body
        elif step is Step.FUN and isinstance(node, App):
            node = node.fun
        elif step is Step.ARG and isinstance(node, App):
            node = node.arg
        else:
            raise InvalidPath(f"step {step.value} does not match node shape")
    return node


def replace_at(t: Term, path: TermPath, sub: Term) -> Term:
    if not path:
        return sub
    step, rest = path[0], path[1:]
    if step is Step.BODY and isinstance(t, Abs):
        return Abs(t.binder, replace_at(t.body, rest, sub))
    if step is Step.FUN and isinstance(t, App):
        return App(replace_at(t.fun, rest, sub), t.arg)
    if step is Step.ARG and isinstance(t, App):
        return App(t.fun, replace_at(t.arg, rest, sub))
    raise InvalidPath(f"step {step.value} does not match node shape")


def shift(t: Term, by: int, cutoff: int = 0) -> Term:
    """Add `by` to every index at or above `cutoff` (indices below are bound
    locally and stay put)."""
    if isinstance(t, BoundVar):
        return BoundVar(t.index + by, t.hint) if t.index >= cutoff else t
    if isinstance(t, Abs):
        return Abs(t.binder, shift(t.body, by, cutoff + 1))
    if isinstance(t, App):
        return App(shift(t.fun, by, cutoff), shift(t.arg, by, cutoff))
    return t


def _subst_top(body: Term, arg: Term) -> Term:
    """body with its outermost binder's variable replaced by arg, closing that
    binder (the standard index-shifting substitution)."""

    def go(node: Term, depth: int) -> Term:
        if isinstance(node, BoundVar):
            if node.index == depth:
                return shift(arg, depth)
            if node.index > depth:
                return BoundVar(node.index - 1, node.hint)
            return node
        if isinstance(node, Abs):
            return Abs(node.binder, go(node.body, depth + 1))
        if isinstance(node, App):
            return App(go(node.fun, depth), go(node.arg, depth))
        return node

    return go(body, 0)


def _binders_on_path(t: Term, path: TermPath) -> list:
    """Binder names of the abstractions entered while walking `path`."""
    names = []
    node = t
    for step in path:
        if step is Step.BODY and isinstance(node, Abs):
            names.append(node.binder)
            node = node.body
        elif step is Step.FUN and isinstance(node, App):
            node = node.fun
        elif step is Step.ARG and isinstance(node, App):
            node = node.arg
        else:
            raise InvalidPath(f"step {step.value} does not match node shape")
    return names


def enumerate_redexes(t: Term, env: Environment = EMPTY_ENV) -> list:
    """All redexes in leftmost-outermost (pre-order) document order.

    An application is a redex when its function is an abstraction, or a
    reference whose definition chain (in env) ends in one. Unresolved
    references in head position simply yield no redex.
    """
    out: list = []

    def walk(node: Term, path: TermPath) -> None:
        if isinstance(node, App):
            head = node.fun
            if isinstance(head, Abs):
                out.append(RedexInfo(path, RedexKind.DIRECT))
            elif isinstance(head, Ref):
                resolved = env.resolve_chain(head.name)
                if resolved is not None and isinstance(resolved[1], Abs):
                    out.append(RedexInfo(path, RedexKind.VIA_EXPANSION, resolved[0]))
            walk(node.fun, path + (Step.FUN,))
            walk(node.arg, path + (Step.ARG,))
        elif isinstance(node, Abs):
            walk(node.body, path + (Step.BODY,))

    walk(t, ())
    return out


def _occurrence_capture(body: Term, arg_free: set) -> set:
    """Which of arg's free names would fall inside a same-named binder of
    `body` at some occurrence of body's outermost bound variable."""
    captured: set = set()

    def go(node: Term, depth: int, binders: frozenset) -> None:
        if isinstance(node, BoundVar):
            if node.index == depth:
                captured.update(arg_free & binders)
        elif isinstance(node, Abs):
            go(node.body, depth + 1, binders | {node.binder})
        elif isinstance(node, App):
            go(node.fun, depth, binders)
            go(node.arg, depth, binders)

    go(body, 0, frozenset())
    return captured


def _redex_at(t: Term, path: TermPath, env: Environment) -> RedexInfo:
    for info in enumerate_redexes(t, env):
        if info.path == path:
            return info
    raise NotARedex(f"no redex at path {tuple(s.value for s in path)}")


def _beta_plan(t: Term, path: TermPath, env: Environment):
    """Resolve the redex at `path` to (function abstraction, argument,
    captured names, capture site). Captures from the head expansion and from
    the substitution itself are both reported."""
    info = _redex_at(t, path, env)
    node = subterm_at(t, path)
    assert isinstance(node, App)
    fun = node.fun
    if info.kind is RedexKind.VIA_EXPANSION:
        chain, final = env.resolve_chain(fun.name)  # type: ignore[union-attr]
        enclosing = set(_binders_on_path(t, path + (Step.FUN,)))
        expansion_capture = _free_names_rel(final) & enclosing
        if expansion_capture:
            return None, None, expansion_capture, path + (Step.FUN,)
        depth = len(_binders_on_path(t, path))
        fun = shift(final, depth)
    assert isinstance(fun, Abs)
    arg_free = _free_names_rel(node.arg)
    captured = _occurrence_capture(fun.body, arg_free)
    return fun, node.arg, captured, path


def would_capture_beta(
    t: Term, path: TermPath, env: Environment = EMPTY_ENV
) -> Optional[CaptureReport]:
    """Predict whether beta_reduce_at would refuse, and why."""
    _, _, captured, site = _beta_plan(t, path, env)
    if captured:
        return CaptureReport(frozenset(captured), site)
    return None


def beta_reduce_at(
    t: Term, path: TermPath, env: Environment = EMPTY_ENV
) -> Union[Term, CaptureReport]:
    """Reduce the redex at `path`. A reference head is expanded through its
    chain first. Substitution is literal: hints travel verbatim, nothing is
    renamed; if any name would change binding the term is left untouched and
    a CaptureReport is returned instead."""
    fun, arg, captured, site = _beta_plan(t, path, env)
    if captured:
        return CaptureReport(frozenset(captured), site)
    return replace_at(t, path, _subst_top(fun.body, arg))


def alpha_convert_at(t: Term, path: TermPath, new_name: str) -> Term:
    """Rename the abstraction at `path` and the hints of its occurrences.

    Refused when the new name is already visible inside the body (it would
    bind a previously free variable) or when an inner binder of the same name
    stands between the abstraction and one of its occurrences (the printed
    hint would resolve to the wrong binder)."""
    node = subterm_at(t, path)
    if not isinstance(node, Abs):
        raise NotAnAbstraction("alpha-conversion targets an abstraction")
    if not VAR_NAME_RE.match(new_name):
        raise InvalidName(new_name)
    body = node.body

    def free_here(n: Term, depth: int) -> bool:
        if isinstance(n, FreeVar):
            return n.name == new_name
        if isinstance(n, BoundVar):
            return n.index > depth and n.hint == new_name
        if isinstance(n, Abs):
            return free_here(n.body, depth + 1)
        if isinstance(n, App):
            return free_here(n.fun, depth) or free_here(n.arg, depth)
        return False

    if free_here(body, 0):
        raise WouldBindFree(new_name)

    def shadowed(n: Term, depth: int, seen: bool) -> bool:
        if isinstance(n, BoundVar):
            return n.index == depth and seen
        if isinstance(n, Abs):
            return shadowed(n.body, depth + 1, seen or n.binder == new_name)
        if isinstance(n, App):
            return shadowed(n.fun, depth, seen) or shadowed(n.arg, depth, seen)
        return False

    if shadowed(body, 0, False):
        raise WouldShadow(new_name)

    def retag(n: Term, depth: int) -> Term:
        if isinstance(n, BoundVar):
            return BoundVar(n.index, new_name) if n.index == depth else n
        if isinstance(n, Abs):
            return Abs(n.binder, retag(n.body, depth + 1))
        if isinstance(n, App):
            return App(retag(n.fun, depth), retag(n.arg, depth))
        return n

    return replace_at(t, path, Abs(new_name, retag(body, 0)))


def expand_at(
    t: Term, path: TermPath, env: Environment
) -> Union[Term, CaptureReport]:
    """Replace the reference at `path` by a copy of its definition, refusing
    when a free variable of the definition would fall inside a same-named
    binder at the site."""
    node = subterm_at(t, path)
    if not isinstance(node, Ref):
        raise NotARef("expansion targets a named-term reference")
    definition = env.definition(node.name)
    enclosing = _binders_on_path(t, path)
    captured = _free_names_rel(definition) & set(enclosing)
    if captured:
        return CaptureReport(frozenset(captured), path)
    return replace_at(t, path, shift(definition, len(enclosing)))


def is_normal_form(t: Term, env: Environment = EMPTY_ENV) -> bool:
    return not enumerate_redexes(t, env)


def arity(t: Term) -> int:
    """Number of leading abstractions; reference heads are not chased."""
    n = 0
    while isinstance(t, Abs):
        n += 1
        t = t.body
    return n


def term_size(t: Term) -> int:
    if isinstance(t, Abs):
        return 1 + term_size(t.body)
    if isinstance(t, App):
        return 1 + term_size(t.fun) + term_size(t.arg)
    return 1


def iter_subterms(t: Term) -> Iterator:
    """(path, subterm) pairs in pre-order."""
    stack = [((), t)]
    while stack:
        path, node = stack.pop()
        yield path, node
        if isinstance(node, Abs):
            stack.append((path + (Step.BODY,), node.body))
        elif isinstance(node, App):
            stack.append((path + (Step.ARG,), node.arg))
            stack.append((path + (Step.FUN,), node.fun))


def validate_term(t: Term) -> list:
    """Well-formedness violations (empty list when t is sound).

    Checks index bounds, hint/binder agreement, name lexical rules, and the
    display-soundness the rewrite rules maintain: no occurrence whose hint is
    shadowed by a closer binder, no free variable under a same-named binder.
    Terms built by the parser satisfy all of these; operations refuse rather
    than break them.
    """
    problems: list = []

    def go(node: Term, stack: tuple) -> None:
        if isinstance(node, BoundVar):
            if not (0 <= node.index < len(stack)):
                problems.append(f"index {node.index} out of range at depth {len(stack)}")
                return
            binder = stack[node.index]
            if node.hint != binder:
                problems.append(f"hint {node.hint!r} does not match binder {binder!r}")
            if node.hint in stack[: node.index]:
                problems.append(f"occurrence of {node.hint!r} shadowed by inner binder")
        elif isinstance(node, FreeVar):
            if not VAR_NAME_RE.match(node.name):
                problems.append(f"illegal variable name {node.name!r}")
            if node.name in stack:
                problems.append(f"free variable {node.name!r} under same-named binder")
        elif isinstance(node, Ref):
            if not DEF_NAME_RE.match(node.name):
                problems.append(f"illegal definition name {node.name!r}")
        elif isinstance(node, Abs):
            if not VAR_NAME_RE.match(node.binder):
                problems.append(f"illegal binder name {node.binder!r}")
            go(node.body, (node.binder,) + stack)
        elif isinstance(node, App):
            go(node.fun, stack)
            go(node.arg, stack)

    go(t, ())
    return problems
