import json
import pathlib

from lambda_lab.cli import main

CORPUS = pathlib.Path(__file__).parent.parent / "corpus" / "church.lam"


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# --- check -------------------------------------------------------------------


def test_check_clean_file(tmp_path, capsys):
    f = tmp_path / "ok.lam"
    f.write_text("True := { λx. λy. x }", encoding="utf-8")
    code, out, _ = run(capsys, "check", str(f))
    assert code == 0
    assert "1 item(s), 0 step(s), OK" in out


def test_check_invalid_step(tmp_path, capsys):
    f = tmp_path / "bad.lam"
    f.write_text("{ (λx. x) y ->β z }", encoding="utf-8")
    code, out, _ = run(capsys, "check", str(f))
    assert code == 1
    assert "step 1 invalid" in out


def test_check_parse_error(tmp_path, capsys):
    f = tmp_path / "broken.lam"
    f.write_text("{ λx }", encoding="utf-8")
    code, out, _ = run(capsys, "check", str(f))
    assert code == 2
    assert ":1:3: error:" in out


def test_check_json_format(tmp_path, capsys):
    f = tmp_path / "steps.lam"
    f.write_text("{ (λx. x) y ->β y ->α y }", encoding="utf-8")
    code, out, _ = run(capsys, "check", str(f), "--format", "json")
    assert code == 1  # the alpha arrow between identical... see below
    report = json.loads(out)
    steps = report["files"][0]["items"][0]["steps"]
    assert steps[0]["status"] == "valid"
    assert steps[0]["witness"] == ""


def test_check_corpus(capsys):
    code, out, _ = run(capsys, "check", str(CORPUS))
    assert code == 0


def test_check_missing_file(capsys):
    code, _, err = run(capsys, "check", "/nonexistent/x.lam")
    assert code == 2


# --- reduce ------------------------------------------------------------------


def test_reduce_omega_step_limit(capsys):
    code, out, _ = run(
        capsys, "reduce", "(λx. x x) (λx. x x)", "--max-steps", "10"
    )
    assert code == 3
    lines = out.strip().split("\n")
    assert lines[0] == "(λx. x x) (λx. x x)"
    assert len(lines) == 12  # initial + 10 steps + status
    assert lines[-1].startswith("StepLimit")
    assert all(l == "->β (λx. x x) (λx. x x)" for l in lines[1:-1])


def test_reduce_with_env(capsys):
    code, out, _ = run(
        capsys, "reduce", "True a b", "--env", str(CORPUS), "--max-steps", "50"
    )
    assert code == 0
    lines = out.strip().split("\n")
    assert lines[-2] == "->β a"
    assert lines[-1].startswith("NormalForm")


def test_reduce_trivial(capsys):
    code, out, _ = run(capsys, "reduce", "y")
    assert code == 0
    assert out.strip().split("\n") == ["y", "NormalForm after 0 step(s)"]


def test_reduce_stuck_capture(capsys):
    code, out, _ = run(capsys, "reduce", "(λx. λp. x) p")
    assert code == 1
    assert "Stuck" in out and "capture of p" in out


def test_reduce_parse_error(capsys):
    code, _, err = run(capsys, "reduce", "λx. (x")
    assert code == 2
    assert "error" in err


def test_reduce_json(capsys):
    code, out, _ = run(capsys, "reduce", "(λx. x) y", "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert data["steps"] == ["(λx. x) y", "y"]
    assert data["rules"] == ["β"]
    assert data["outcome"] == "normal-form"


def test_reduce_applicative_strategy(capsys):
    code, out, _ = run(
        capsys, "reduce", "(λx. x) ((λy. y) z)", "--strategy", "applicative-order"
    )
    assert code == 0
    assert out.strip().split("\n")[1] == "->β (λx. x) z"


def test_reduce_trace_checks_clean(tmp_path, capsys):
    code, out, _ = run(
        capsys, "reduce", "Plus Two Three", "--env", str(CORPUS), "--max-steps", "200"
    )
    assert code == 0
    trace_lines = out.strip().split("\n")[:-1]
    combined = CORPUS.read_text(encoding="utf-8") + "\n{\n" + "\n".join(
        "  " + line for line in trace_lines
    ) + "\n}\n"
    f = tmp_path / "replay.lam"
    f.write_text(combined, encoding="utf-8")
    code2, out2, _ = run(capsys, "check", str(f))
    assert code2 == 0, out2


# --- redexes -----------------------------------------------------------------


def test_redexes_omega(capsys):
    code, out, _ = run(capsys, "redexes", "(λx. x x) (λx. x x)")
    assert code == 0
    assert out.strip() == "1 direct at []: (λx. x x) (λx. x x)"


def test_redexes_none(capsys):
    code, out, _ = run(capsys, "redexes", "λx. x")
    assert code == 0
    assert out.strip() == "0 redexes"


def test_redexes_preorder(capsys):
    code, out, _ = run(capsys, "redexes", "λx.(λy. y)((λz. z) x)")
    assert code == 0
    lines = out.strip().split("\n")
    assert lines[0].startswith("1 direct at body:")
    assert lines[1].startswith("2 direct at body.arg:")


def test_redexes_via_expansion(capsys):
    code, out, _ = run(capsys, "redexes", "True a b", "--env", str(CORPUS))
    assert code == 0
    assert "via-expansion" in out


def test_redexes_json(capsys):
    code, out, _ = run(capsys, "redexes", "(λx. x) y", "--format", "json")
    data = json.loads(out)
    assert data["redexes"][0] == {
        "index": 0,
        "kind": "direct",
        "path": "",
        "term": "(λx. x) y",
    }


# --- fmt ----------------------------------------------------------------------


def test_fmt_normalizes_keywords(tmp_path, capsys):
    f = tmp_path / "ascii.lam"
    f.write_text("{ \\lambda x. x }", encoding="utf-8")
    code, out, _ = run(capsys, "fmt", str(f))
    assert code == 0
    assert out == "{\n  λx. x\n}\n"


def test_fmt_normalizes_arrows(tmp_path, capsys):
    f = tmp_path / "arrows.lam"
    f.write_text("{ (\\x. x) y ->\\beta y }", encoding="utf-8")
    code, out, _ = run(capsys, "fmt", str(f))
    assert code == 0
    assert "->β y" in out and "->\\beta" not in out


def test_fmt_idempotent_write(tmp_path, capsys):
    f = tmp_path / "file.lam"
    f.write_text("{ \\x,y. x ((\\z. z) w) }", encoding="utf-8")
    assert run(capsys, "fmt", str(f), "--write")[0] == 0
    once = f.read_text(encoding="utf-8")
    assert run(capsys, "fmt", str(f), "--write")[0] == 0
    assert f.read_text(encoding="utf-8") == once


def test_fmt_idempotent_on_corpus(capsys):
    code, out, _ = run(capsys, "fmt", str(CORPUS))
    assert code == 0
    import lambda_lab.syntax as syntax

    doc, diags = syntax.parse_document(out)
    assert diags == []
    assert syntax.print_document(doc) == out


def test_fmt_refuses_partial_write(tmp_path, capsys):
    f = tmp_path / "broken.lam"
    original = "{ λx }"
    f.write_text(original, encoding="utf-8")
    code, _, err = run(capsys, "fmt", str(f), "--write")
    assert code == 2
    assert f.read_text(encoding="utf-8") == original


# --- config handling -----------------------------------------------------------


def test_custom_config_file(tmp_path, capsys):
    cfg = tmp_path / "custom.cfg"
    cfg.write_text("multi_binding_delimiter = whitespace\n", encoding="utf-8")
    f = tmp_path / "t.lam"
    f.write_text("{ λx y. x }", encoding="utf-8")
    code, out, _ = run(capsys, "--config", str(cfg), "fmt", str(f))
    assert code == 0
    assert "λx. λy. x" in out


def test_bad_config_exits_2(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("mystery = value\n", encoding="utf-8")
    code, _, err = run(capsys, "--config", str(cfg), "redexes", "x")
    assert code == 2


def test_default_config_discovered_in_cwd(tmp_path, capsys, monkeypatch):
    monkeypatch.chdir(tmp_path)
    (tmp_path / "lambda-lab.cfg").write_text(
        "multi_binding_delimiter = whitespace\n", encoding="utf-8"
    )
    f = tmp_path / "t.lam"
    f.write_text("{ λa b. a }", encoding="utf-8")
    code, out, _ = run(capsys, "fmt", str(f))
    assert code == 0
    assert "λa. λb. a" in out
