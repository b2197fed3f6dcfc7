"""Acceptance suite: one test per criterion, each printing a PASS line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines and timings alongside the pytest verdicts.
"""

import pathlib
import random
import time

from lambda_lab.cli import main as cli_main
from lambda_lab.derivation import (
    AlphaRename,
    BetaAt,
    Derivation,
    ExpandAt,
    NormalFormReached,
    StepLimitReached,
    Strategy,
    StuckOnCapture,
    apply_action,
    normalize,
    validate_derivation,
)
from lambda_lab.syntax import parse_document, parse_term, print_term
from lambda_lab.terms import (
    Abs,
    App,
    CaptureReport,
    Environment,
    RedexKind,
    Ref,
    alpha_eq,
    beta_reduce_at,
    enumerate_redexes,
    iter_subterms,
    would_capture_beta,
)
from lambda_lab.workspace import (
    Redo,
    Undo,
    edit_text,
    open_session,
    outline,
    ui_action,
)
from lambda_lab.syntax import SourceSpan

import oracles
from termgen import enumerate_terms, random_term

CORPUS = pathlib.Path(__file__).parent.parent / "corpus" / "church.lam"


def report(name: str, detail: str = "") -> None:
    suffix = f" ({detail})" if detail else ""
    print(f"\nACCEPTANCE {name}: PASS{suffix}")


def test_round_trip_suite():
    started = time.perf_counter()
    count = 0
    for t in enumerate_terms(10, ("x",), ("u",), ("F",)):
        assert parse_term(print_term(t)) == t
        count += 1
    rng = random.Random(20260810)
    for _ in range(1000):
        t = random_term(rng, rng.randint(1, 200), refs=("F", "G"))
        assert parse_term(print_term(t)) == t
    elapsed = time.perf_counter() - started
    assert elapsed < 10.0, f"round-trip suite took {elapsed:.1f}s"
    report("round-trip", f"{count} exhaustive + 1000 random terms in {elapsed:.1f}s")


def test_redex_oracle():
    started = time.perf_counter()
    env = Environment(
        {
            "F": Ref("H"),  # resolves to an abstraction through a chain
            "G": parse_term("u u"),  # resolves to a non-abstraction
            "H": parse_term("λv. v"),
        }
    )
    count = 0
    for t in enumerate_terms(12, ("x",), (), ("F", "G")):
        assert enumerate_redexes(t, env) == oracles.scan_redexes(t, env)
        count += 1
    elapsed = time.perf_counter() - started
    assert elapsed < 30.0, f"redex oracle took {elapsed:.1f}s"
    report("redex-oracle", f"{count} terms, 3-definition environment, {elapsed:.1f}s")


def test_capture_refusal():
    rng = random.Random(424242)
    checked = refusals = 0
    while checked < 1000:
        t = random_term(rng, rng.randint(4, 18))
        direct = [r for r in enumerate_redexes(t) if r.kind is RedexKind.DIRECT]
        if not direct:
            continue
        info = rng.choice(direct)
        checked += 1
        before = t
        predicted = would_capture_beta(t, info.path)
        safe = oracles.naive_subst_is_safe(t, info.path)
        assert (predicted is None) == safe, (print_term(t), info.path)
        result = beta_reduce_at(t, info.path)
        if predicted is None:
            assert not isinstance(result, CaptureReport)
        else:
            refusals += 1
            assert isinstance(result, CaptureReport)
            assert t == before  # refusal leaves the term untouched
    report("capture-refusal", f"1000 redexes, {refusals} refusals")


def test_omega_divergence():
    started = time.perf_counter()
    omega = parse_term("(λx. x x) (λx. x x)")
    trace, outcome = normalize(omega, Environment(), Strategy.NORMAL_ORDER, 1000)
    assert isinstance(outcome, StepLimitReached)
    assert len(trace.steps) == 1001
    first = trace.steps[0]
    assert all(alpha_eq(first, step) for step in trace.steps)
    elapsed = time.perf_counter() - started
    assert elapsed < 1.0, f"omega took {elapsed:.2f}s"
    report("omega-divergence", f"1000 steps in {elapsed:.2f}s")


def church(n: int):
    body = "x"
    for _ in range(n):
        body = f"f ({body})" if body != "x" else "f x"
    return parse_term(f"λf. λx. {body}")


def _reduce_and_check(capsys, tmp_path, expr: str, expected, label: str):
    code = cli_main(
        ["reduce", expr, "--env", str(CORPUS), "--max-steps", "200"]
    )
    out = capsys.readouterr().out
    assert code == 0, out
    lines = out.strip().split("\n")
    assert lines[-1].startswith("NormalForm")
    final = parse_term(lines[-2].split(" ", 1)[1] if lines[-2].startswith("->") else lines[-2])
    assert alpha_eq(final, expected), f"{label}: got {print_term(final)}"
    steps = lines[:-1]
    replay = tmp_path / f"{label}.lam"
    replay.write_text(
        CORPUS.read_text(encoding="utf-8")
        + "\n{\n"
        + "\n".join("  " + line for line in steps)
        + "\n}\n",
        encoding="utf-8",
    )
    code = cli_main(["check", str(replay)])
    check_out = capsys.readouterr().out
    assert code == 0, check_out
    return len(steps) - 1


def test_church_arithmetic(capsys, tmp_path):
    plus_steps = _reduce_and_check(capsys, tmp_path, "Plus Two Three", church(5), "plus")
    times_steps = _reduce_and_check(capsys, tmp_path, "Times Two Three", church(6), "times")
    assert plus_steps <= 200 and times_steps <= 200
    report(
        "church-arithmetic",
        f"Plus Two Three -> 5 in {plus_steps} steps, "
        f"Times Two Three -> 6 in {times_steps} steps, traces check clean",
    )


def test_confluence_sample():
    rng = random.Random(1315)
    env = Environment()
    agreed = stuck = limited = attempts = 0
    while agreed < 200 and attempts < 4000:
        attempts += 1
        t = random_term(rng, rng.randint(2, 25))
        n_trace, n_out = normalize(t, env, Strategy.NORMAL_ORDER, 500)
        a_trace, a_out = normalize(t, env, Strategy.APPLICATIVE_ORDER, 500)
        if isinstance(n_out, StuckOnCapture) or isinstance(a_out, StuckOnCapture):
            stuck += 1
            continue
        if not (
            isinstance(n_out, NormalFormReached) and isinstance(a_out, NormalFormReached)
        ):
            limited += 1
            continue
        assert alpha_eq(n_trace.last, a_trace.last), print_term(t)
        agreed += 1
    assert agreed >= 200
    report(
        "confluence-sample",
        f"{agreed} agreeing pairs, {stuck} capture-stuck, {limited} over budget",
    )


def _random_derivation(rng, env):
    start = random_term(rng, rng.randint(4, 16), refs=("F",))
    d = Derivation(None, (start,), ())
    for _ in range(rng.randint(1, 5)):
        choices = []
        redexes = enumerate_redexes(d.last, env)
        if redexes:
            choices.append("beta")
        abs_paths = [p for p, n in iter_subterms(d.last) if isinstance(n, Abs)]
        if abs_paths:
            choices.append("alpha")
        ref_paths = [
            p for p, n in iter_subterms(d.last) if isinstance(n, Ref) and n.name in env
        ]
        if ref_paths:
            choices.append("expand")
        if not choices:
            break
        kind = rng.choice(choices)
        try:
            if kind == "beta":
                result = apply_action(d, BetaAt(rng.choice(redexes).path), env)
            elif kind == "alpha":
                name = rng.choice(["ren1", "ren2", "ren3"])
                result = apply_action(d, AlphaRename(rng.choice(abs_paths), name), env)
            else:
                result = apply_action(d, ExpandAt(rng.choice(ref_paths)), env)
        except Exception:
            continue
        if isinstance(result, CaptureReport):
            continue
        d = result
    return d


def _mutate_last(d):
    """Swap the sides of an asymmetric application in the final term."""
    last = d.steps[-1]
    for path, node in iter_subterms(last):
        if isinstance(node, App) and node.fun != node.arg:
            from lambda_lab.terms import replace_at

            mutated = replace_at(last, path, App(node.arg, node.fun))
            if mutated != last:
                return Derivation(d.name, d.steps[:-1] + (mutated,), d.rules)
    return None


def test_derivation_soundness():
    rng = random.Random(60321)
    env = Environment({"F": parse_term("λs. λt. s (s t)")})
    produced = mutated_checked = 0
    while produced < 500:
        d = _random_derivation(rng, env)
        if len(d.steps) < 2:
            continue
        produced += 1
        verdicts = validate_derivation(d, env)
        assert all(v.valid for v in verdicts), (d, verdicts)
        broken = _mutate_last(d)
        if broken is None:
            continue
        mutated_checked += 1
        broken_verdicts = validate_derivation(broken, env)
        expected = [True] * (len(d.rules) - 1) + [False]
        assert [v.valid for v in broken_verdicts] == expected
    assert mutated_checked >= 300
    report(
        "derivation-soundness",
        f"500 derivations all valid, {mutated_checked} mutations flagged at the mutated index",
    )


def test_undo_redo_and_editor_sync():
    rng = random.Random(808)
    s = open_session("Id := { λx. x }\n\n{ Id ((λy. y) z) }\n\n{ (λa. a) (λb. b) }")
    shadow_undo = []
    shadow_redo = []
    actions = edits = undos = redos = 0
    for _ in range(50):
        state = (s.source_text, s.selection)
        ids = [i for i, _ in outline(s)]
        roll = rng.random()
        if roll < 0.35 and ids:
            item_id = rng.choice(ids)
            for i, item in enumerate(s.doc.items):
                if (item.name or f"#{i + 1}") == item_id:
                    redexes = enumerate_redexes(item.terms[-1][0], s.env)
                    break
            if not redexes:
                continue
            out = ui_action(s, item_id, BetaAt(rng.choice(redexes).path))
            if out.warning is None:
                shadow_undo.append(state)
                shadow_redo.clear()
                actions += 1
            s = out.session
        elif roll < 0.55:
            pos = rng.randint(0, len(s.source_text))
            line = s.source_text[:pos].count("\n") + 1
            col = pos - (s.source_text[:pos].rfind("\n") + 1) + 1
            s = edit_text(s, SourceSpan(line, col, line, col), rng.choice([" ", "\n-- note\n"]))
            shadow_undo.append(state)
            shadow_redo.clear()
            edits += 1
        elif roll < 0.8:
            out = ui_action(s, ids[0] if ids else "#1", Undo())
            if out.warning is None:
                shadow_redo.append(state)
                restored = shadow_undo.pop()
                assert (out.session.source_text, out.session.selection) == restored
                undos += 1
            else:
                assert not shadow_undo
            s = out.session
        else:
            out = ui_action(s, ids[0] if ids else "#1", Redo())
            if out.warning is None:
                shadow_undo.append(state)
                restored = shadow_redo.pop()
                assert (out.session.source_text, out.session.selection) == restored
                redos += 1
            else:
                assert not shadow_redo
            s = out.session
        doc, _ = parse_document(s.source_text, s.config)
        assert doc == s.doc
    report(
        "undo-redo-editor-sync",
        f"depth 50: {actions} actions, {edits} edits, {undos} undos, {redos} redos",
    )
