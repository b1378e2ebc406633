import io
import json
import subprocess
import sys

import pytest

from behavmetric.cli import EXIT_INPUT, EXIT_NOCONV, EXIT_OK, EXIT_VIOLATION, main, num, render_tsv
from behavmetric.systems import builtin_text


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    return code, json.loads(out) if out.strip() else None, err


@pytest.fixture
def fixture_file(tmp_path):
    def write(name):
        p = tmp_path / f"{name}.yaml"
        p.write_text(builtin_text(name))
        return str(p)
    return write


def lookup(matrix, a, b):
    states = matrix["states"]
    return matrix["rows"][states.index(a)][states.index(b)]


def test_num_formatting():
    assert num(3) == 3
    assert num(float("inf")) == "inf"
    assert num(0.1 + 0.2) == 0.3
    assert num(True) is True


def test_transport_fixture(capsys, tmp_path):
    code, out, _ = run(capsys, "examples", "transport-abc", "--raw")
    assert code == EXIT_OK
    path = tmp_path / "t.yaml"
    path.write_text(out)
    code, doc, _ = run_json(capsys, "transport", str(path))
    assert code == EXIT_OK
    assert doc["cost"] == pytest.approx(2.1)
    assert doc["dual_value"] == pytest.approx(2.1)
    assert doc["potentials"] == pytest.approx({"A": 0, "B": 3, "C": 5})
    assert doc["competitive"] is True
    assert doc["duality_gap"] <= 1e-9


def test_transport_from_stdin(capsys, monkeypatch):
    text = "top: 1\npoints: [0, 0.5]\nsupply: {0: 1}\ndemand: {0.5: 1}\n"
    monkeypatch.setattr(sys, "stdin", io.StringIO(text))
    code, doc, _ = run_json(capsys, "transport", "-")
    assert code == EXIT_OK and doc["cost"] == pytest.approx(0.5)


def test_transport_without_coupling(capsys, monkeypatch):
    text = "top: 1\npoints: [0]\nsupply: {0: 0.3}\ndemand: {0: 0.7}\nsub: true\n"
    monkeypatch.setattr(sys, "stdin", io.StringIO(text))
    code, doc, _ = run_json(capsys, "transport", "-")
    assert code == EXIT_OK
    assert doc["cost"] == 1 and doc["plan"] is None
    assert doc["message"] == "no coupling: distance = top"


def test_bisim_fig2(capsys, fixture_file):
    code, doc, _ = run_json(capsys, "bisim", fixture_file("fig2-pts"))
    assert code == EXIT_OK and doc["converged"]
    assert lookup(doc["matrix"], "x", "y") == pytest.approx(0.09)
    assert lookup(doc["matrix"], "u", "z") == 1


def test_bisim_tsv(capsys, fixture_file):
    code, out, _ = run(capsys, "bisim", fixture_file("fig4-mts"), "--format", "tsv")
    assert code == EXIT_OK
    lines = out.splitlines()
    assert "matrix" in lines
    header = lines[lines.index("matrix") + 1].split("\t")
    assert header[0] == "" and "x1" in header


def test_bisim_set_override(capsys, fixture_file):
    code, doc, _ = run_json(capsys, "bisim", fixture_file("fig2-pts"), "--set", "c=1")
    assert code == EXIT_OK
    assert lookup(doc["matrix"], "x", "y") == pytest.approx(0.1)
    assert doc["parameters"]["c"] == 1


def test_bisim_non_convergence_exit_code(capsys, fixture_file):
    code, doc, _ = run_json(capsys, "bisim", fixture_file("fig2-pts"), "--max-iter", "1")
    assert code == EXIT_NOCONV
    assert doc["converged"] is False


def test_bisim_trace_flag(capsys, fixture_file):
    code, doc, _ = run_json(capsys, "bisim", fixture_file("dfa-aa"), "--trace")
    assert code == EXIT_OK and len(doc["trace"]) == doc["iterations"]


def test_top_conflict(capsys, fixture_file):
    code, out, err = run(capsys, "bisim", fixture_file("fig4-mts"), "--top", "1")
    assert code == EXIT_INPUT and out == ""
    assert err.startswith("error:") and "conflicts" in err


def test_bisim_rejects_trace_kinds(capsys, fixture_file):
    code, _, err = run(capsys, "bisim", fixture_file("nfa-ab"))
    assert code == EXIT_INPUT and "trace" in err


def test_malformed_file(capsys, tmp_path):
    p = tmp_path / "bad.yaml"
    p.write_text("kind: pts\ntop: 1\nstates: [a\n")
    code, _, err = run(capsys, "bisim", str(p))
    assert code == EXIT_INPUT and err.startswith("error:")
    code, _, err = run(capsys, "bisim", str(tmp_path / "missing.yaml"))
    assert code == EXIT_INPUT and "cannot read" in err


def test_unknown_override(capsys, fixture_file):
    code, _, err = run(capsys, "bisim", fixture_file("fig2-pts"), "--set", "zz=1")
    assert code == EXIT_INPUT and "zz" in err


def test_trace_nfa(capsys, fixture_file):
    code, doc, _ = run_json(capsys, "trace", fixture_file("nfa-ab"), "--from", "x", "--to", "y")
    assert code == EXIT_OK
    assert doc["distance"] == 0.25 and doc["word"] == ["a", "b"]
    code, doc, _ = run_json(capsys, "trace", fixture_file("nfa-ab"), "--from", "x", "--to", "x")
    assert doc["distance"] == 0 and doc["word"] == "none"


def test_trace_pa(capsys, fixture_file):
    code, doc, _ = run_json(capsys, "trace", fixture_file("pa-small"), "--from", "x", "--to", "y")
    assert code == EXIT_OK
    assert doc["distance"] == pytest.approx(0.338297872339, abs=1e-9)
    assert doc["depth"] == 19
    assert doc["tail_bound"] <= 1e-8


def test_trace_unknown_state(capsys, fixture_file):
    code, _, err = run(capsys, "trace", fixture_file("nfa-ab"), "--from", "x", "--to", "nope")
    assert code == EXIT_INPUT and "nope" in err


def test_lift_squaring_swap(capsys):
    code, doc, _ = run_json(capsys, "lift", "--functor", "squaring", "--top", "inf",
                            "--metric", "{points: [0, 0.5]}", "--left", "[0, 0.5]", "--right", "[0.5, 0]",
                            "--grid", "0.25")
    assert code == EXIT_OK
    assert doc["wasserstein"] == 1 and doc["grid_kantorovich"] == 0


def test_lift_distribution(capsys):
    code, doc, _ = run_json(capsys, "lift", "--functor", "distribution", "--metric", "{points: [0, 1]}",
                            "--left", "{0: 1}", "--right", "{0: 0.5, 1: 0.5}")
    assert code == EXIT_OK and doc["wasserstein"] == pytest.approx(0.5)


def test_lift_metric_from_file(capsys, tmp_path):
    p = tmp_path / "m.yaml"
    p.write_text("elements: [a, b]\ndistances: [[0, 0.3], [0.3, 0]]\n")
    code, doc, _ = run_json(capsys, "lift", "--functor", "powerset", "--mode", "max", "--metric", f"@{p}",
                            "--left", "[a]", "--right", "[a, b]")
    assert code == EXIT_OK and doc["wasserstein"] == pytest.approx(0.3)


def test_lift_arity_mismatch(capsys):
    code, _, err = run(capsys, "lift", "--functor", "product", "--mode", "max", "--metric", "{points: [0]}",
                       "--left", "[0, 0]", "--right", "[0, 0]")
    assert code == EXIT_INPUT and "--metric" in err


def test_check_pass_and_violation(capsys):
    code, doc, _ = run_json(capsys, "check", "axioms:coproduct", "--budget", "20")
    assert code == EXIT_OK and doc["passed"] is True
    code, doc, _ = run_json(capsys, "check", "well-behaved:powerset-min", "--budget", "20")
    assert code == EXIT_VIOLATION
    assert doc["passed"] is False and doc["violations"]


def test_check_list_and_unknown(capsys):
    code, doc, _ = run_json(capsys, "check", "--list")
    assert code == EXIT_OK and "distlaw:nfa" in doc["checks"]
    code, _, err = run(capsys, "check", "nope")
    assert code == EXIT_INPUT


def test_examples_list(capsys):
    code, doc, _ = run_json(capsys, "examples")
    names = {e["name"] for e in doc["examples"]}
    assert {"fig2-pts", "fig4-mts", "dfa-aa", "nfa-ab", "real-machine-small", "pa-small",
            "transport-abc"} <= names
    assert all(e["description"] for e in doc["examples"])


def test_examples_dump(capsys):
    code, doc, _ = run_json(capsys, "examples", "dfa-aa")
    assert code == EXIT_OK and doc["document"]["kind"] == "dfa"
    code, _, err = run(capsys, "examples", "nope")
    assert code == EXIT_INPUT


def test_usage_errors(capsys):
    code, _, _ = run(capsys)
    assert code == EXIT_INPUT
    code, _, _ = run(capsys, "bisim")
    assert code == EXIT_INPUT


def test_render_tsv_scalars_and_lists():
    text = render_tsv({"a": 1.5, "b": [1, 2], "c": {"d": float("inf")}})
    assert text == "a\t1.5\nb\t[1, 2]\nc.d\tinf\n"


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "behavmetric", "examples"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "fig2-pts" in proc.stdout
