"""Derivations: rule-application bookkeeping, step checking, batch reduction.

A derivation is an initial term plus the terms produced by applying rules,
one arrow per step, exactly as written in a `.lam` item. Rules only ever
apply to the last term; the only way a derivation grows is by appending.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

from .syntax import Diagnostic, DocumentAst, Severity
from .terms import (
    Abs,
    CaptureReport,
    Environment,
    NotARedex,
    RedexKind,
    Ref,
    Rule,
    Step,
    Term,
    TermPath,
    alpha_convert_at,
    beta_reduce_at,
    definition_cycles,
    enumerate_redexes,
    expand_at,
    iter_subterms,
    subterm_at,
    would_capture_beta,
)


@dataclass(frozen=True)
class Derivation:
    name: Optional[str]
    steps: tuple  # tuple[Term, ...], non-empty
    rules: tuple  # tuple[Rule, ...], len == len(steps) - 1

    def __post_init__(self) -> None:
        if not self.steps:
            raise ValueError("a derivation needs at least one term")
        if len(self.rules) != len(self.steps) - 1:
            raise ValueError("rule count must be one less than term count")

    @property
    def last(self) -> Term:
        return self.steps[-1]

    def extended(self, additions: list) -> "Derivation":
        new_steps = self.steps + tuple(term for _, term in additions)
        new_rules = self.rules + tuple(rule for rule, _ in additions)
        return Derivation(self.name, new_steps, new_rules)


@dataclass(frozen=True)
class AlphaRename:
    path: TermPath
    new_name: str


@dataclass(frozen=True)
class BetaAt:
    path: TermPath


@dataclass(frozen=True)
class ExpandAt:
    path: TermPath


Action = Union[AlphaRename, BetaAt, ExpandAt]


@dataclass(frozen=True)
class StepVerdict:
    index: int
    valid: bool
    reason: Optional[str] = None
    witness: Optional[TermPath] = None


def build_environment(doc: DocumentAst) -> tuple:
    """Environment from a document's named items, in document order.

    A named item's definition is its first term (the term as written; later
    steps only derive from it). Redefinitions keep the first definition and
    add an error diagnostic; definitions caught in a reference cycle are
    dropped with a diagnostic naming every participant.
    """
    defs: dict = {}
    spans: dict = {}
    diagnostics: list = []
    for item in doc.items:
        if item.name is None:
            continue
        if item.name in defs:
            diagnostics.append(
                Diagnostic(
                    Severity.ERROR,
                    item.span,
                    f"redefinition of {item.name} (first definition wins)",
                    "redefinition",
                )
            )
            continue
        defs[item.name] = item.terms[0][0]
        spans[item.name] = item.span
    for cycle in definition_cycles(defs):
        diagnostics.append(
            Diagnostic(
                Severity.ERROR,
                spans[cycle[0]],
                "cyclic definitions: " + ", ".join(cycle),
                "cyclic_definition",
            )
        )
        for name in cycle:
            del defs[name]
    return Environment(defs), diagnostics


def apply_action(
    d: Derivation, action: Action, env: Environment
) -> Union[Derivation, CaptureReport]:
    """Apply one manipulation to the last term, returning the grown
    derivation. A beta on a reference-headed redex records each head
    expansion as its own equivalence step before the beta step. Refusals and
    errors leave d untouched."""
    last = d.last
    if isinstance(action, AlphaRename):
        renamed = alpha_convert_at(last, action.path, action.new_name)
        return d.extended([(Rule.ALPHA, renamed)])
    if isinstance(action, ExpandAt):
        expanded = expand_at(last, action.path, env)
        if isinstance(expanded, CaptureReport):
            return expanded
        return d.extended([(Rule.EQUIV, expanded)])
    assert isinstance(action, BetaAt)
    info = None
    for candidate in enumerate_redexes(last, env):
        if candidate.path == action.path:
            info = candidate
            break
    if info is None:
        # surface shape errors for paths that do not even address an application
        subterm_at(last, action.path)
        raise NotARedex("no reducible application at this path")
    if info.kind is RedexKind.DIRECT:
        reduced = beta_reduce_at(last, action.path, env)
        if isinstance(reduced, CaptureReport):
            return reduced
        return d.extended([(Rule.BETA, reduced)])
    refusal = would_capture_beta(last, action.path, env)
    if refusal is not None:
        return refusal
    additions: list = []
    current = last
    for _ in info.ref_chain:
        expanded = expand_at(current, action.path + (Step.FUN,), env)
        assert not isinstance(expanded, CaptureReport)
        additions.append((Rule.EQUIV, expanded))
        current = expanded
    reduced = beta_reduce_at(current, action.path, env)
    assert not isinstance(reduced, CaptureReport)
    additions.append((Rule.BETA, reduced))
    return d.extended(additions)


def _literal_eq(a: Term, b: Term) -> bool:
    return a == b


def validate_derivation(d: Derivation, env: Environment) -> list:
    """Check every arrow of a student-written derivation.

    Comparison is literal (hints included): alpha is an explicit rule here,
    so a beta step that silently also renames is invalid. Alpha steps must be
    a single-binder rename; beta steps must come from a direct redex (head
    expansions are their own equivalence arrows)."""
    verdicts: list = []
    for i, rule in enumerate(d.rules):
        before, after = d.steps[i], d.steps[i + 1]
        verdicts.append(_check_step(i, rule, before, after, env))
    return verdicts


def _check_step(i: int, rule: Rule, before: Term, after: Term, env: Environment) -> StepVerdict:
    if rule is Rule.BETA:
        for info in enumerate_redexes(before, env):
            if info.kind is not RedexKind.DIRECT:
                continue
            result = beta_reduce_at(before, info.path, env)
            if not isinstance(result, CaptureReport) and _literal_eq(result, after):
                return StepVerdict(i, True, witness=info.path)
        return StepVerdict(i, False, reason="no β-redex produces this term")
    if rule is Rule.EQUIV:
        for path, node in iter_subterms(before):
            if not isinstance(node, Ref) or node.name not in env:
                continue
            expanded = expand_at(before, path, env)
            if not isinstance(expanded, CaptureReport) and _literal_eq(expanded, after):
                return StepVerdict(i, True, witness=path)
        return StepVerdict(i, False, reason="no single expansion produces this term")
    assert rule is Rule.ALPHA
    for path, node in iter_subterms(before):
        if not isinstance(node, Abs):
            continue
        try:
            target = subterm_at(after, path)
        except Exception:
            continue
        if not isinstance(target, Abs):
            continue
        try:
            renamed = alpha_convert_at(before, path, target.binder)
        except Exception:
            continue
        if _literal_eq(renamed, after):
            return StepVerdict(i, True, witness=path)
    return StepVerdict(i, False, reason="no single-binder rename produces this term")


class Strategy(Enum):
    NORMAL_ORDER = "normal-order"
    APPLICATIVE_ORDER = "applicative-order"


@dataclass(frozen=True)
class NormalFormReached:
    pass


@dataclass(frozen=True)
class StepLimitReached:
    pass


@dataclass(frozen=True)
class StuckOnCapture:
    report: CaptureReport


Outcome = Union[NormalFormReached, StepLimitReached, StuckOnCapture]


def _select_redex(redexes: list, strategy: Strategy):
    if strategy is Strategy.NORMAL_ORDER:
        return redexes[0]
    innermost = [
        r
        for r in redexes
        if not any(
            q.path != r.path and q.path[: len(r.path)] == r.path for q in redexes
        )
    ]
    return innermost[-1]


def normalize(
    t: Term,
    env: Environment,
    strategy: Strategy = Strategy.NORMAL_ORDER,
    max_steps: int = 1000,
) -> tuple:
    """Reduce t until no redex remains, the step budget runs out, or the
    chosen redex refuses on capture (no renaming happens in batch mode
    either). Every recorded term, expansions included, counts against
    max_steps, so the trace never exceeds max_steps + 1 terms."""
    trace = Derivation(None, (t,), ())
    while True:
        redexes = enumerate_redexes(trace.last, env)
        if not redexes:
            return trace, NormalFormReached()
        if len(trace.steps) - 1 >= max_steps:
            return trace, StepLimitReached()
        info = _select_redex(redexes, strategy)
        refusal = would_capture_beta(trace.last, info.path, env)
        if refusal is not None:
            return trace, StuckOnCapture(refusal)
        if info.kind is RedexKind.VIA_EXPANSION:
            truncated = False
            for _ in info.ref_chain:
                if len(trace.steps) - 1 >= max_steps:
                    truncated = True
                    break
                expanded = expand_at(trace.last, info.path + (Step.FUN,), env)
                assert not isinstance(expanded, CaptureReport)
                trace = trace.extended([(Rule.EQUIV, expanded)])
            if truncated:
                return trace, StepLimitReached()
            if len(trace.steps) - 1 >= max_steps:
                return trace, StepLimitReached()
        reduced = beta_reduce_at(trace.last, info.path, env)
        assert not isinstance(reduced, CaptureReport)
        trace = trace.extended([(Rule.BETA, reduced)])
