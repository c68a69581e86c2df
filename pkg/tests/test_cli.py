import io
import json
from pathlib import Path

import pytest

from bpdyn.cli import main

DATA = Path(__file__).resolve().parents[1] / "data"
GRAPH = str(DATA / "appendix_a.bpgraph")


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


def test_solve_irls_figure2(tmp_path):
    out = tmp_path / "t.json"
    code, text = run("solve", "--graph", GRAPH, "--variant", "irls", "--start", "figure2",
                     "--out", str(out))
    assert code == 0
    d = json.loads(out.read_text())
    names = d["column_names"]
    y1 = next(it["y"] for it in d["iterates"] if it["k"] == 1)
    assert y1[names.index("u3-u4")] == 0.0
    assert "||y||_1 = 4" in text


def test_oracle_prints_unique():
    code, text = run("oracle", "--graph", GRAPH)
    assert code == 0
    assert text.splitlines()[0] == "optimal 3, unique"


def test_alpha_identity():
    code, text = run("alpha", "--instance", str(DATA / "eye2.bpinst"))
    assert code == 0 and text.strip() == "1"


def test_oracle_non_unique():
    code, text = run("oracle", "--graph", str(DATA / "parallel_edges.bpgraph"))
    assert text.splitlines()[0] == "optimal 1, non-unique"


def test_appendix_subcommand():
    code, text = run("appendix-a")
    assert code == 0
    assert "y[u3-u4] = 0" in text and "optimal 3" in text


@pytest.mark.parametrize(
    "argv",
    [
        ["solve", "--graph", GRAPH, "--variant", "irls", "--eta", "0.1"],
        ["solve", "--graph", GRAPH, "--variant", "reg-irls"],
        ["solve", "--graph", GRAPH, "--variant", "physarum"],
        ["solve", "--graph", GRAPH, "--variant", "irls", "--h", "0.5"],
        ["solve", "--graph", GRAPH, "--theorem-h"],
        ["solve", "--random", "3,6,2", "--start", "figure2", "--h", "0.1"],
        ["solve", "--graph", "/nonexistent.bpgraph", "--h", "0.1"],
    ],
)
def test_usage_errors(argv, capsys):
    assert run(*argv)[0] == 2
    assert "error" in capsys.readouterr().err


def test_argparse_errors_exit_2():
    with pytest.raises(SystemExit) as exc:
        run("solve", "--graph", GRAPH, "--instance", "x.bpinst")
    assert exc.value.code == 2


def test_start_file(tmp_path):
    inst = tmp_path / "c.bpinst"
    inst.write_text("2 3\n1 0 0\n0 1 1\n1 1\n")
    start = tmp_path / "y0.txt"
    start.write_text("1 0 1\n")
    args = ("solve", "--instance", str(inst), "--variant", "irls", "--start", f"file:{start}")
    assert run(*args)[0] == 0
    start.write_text("0 0.5 0.5\n")
    assert run(*args)[0] == 2  # A y0 != b


def test_support_collapse_exit_3(monkeypatch):
    from bpdyn import dynamics
    from bpdyn.errors import InfeasibleOnSupport

    def collapse(A, b, w):
        raise InfeasibleOnSupport("support lost a row")

    monkeypatch.setattr(dynamics, "weighted_l2_min", collapse)
    code, text = run("solve", "--graph", GRAPH, "--variant", "irls")
    assert code == 3
    assert "support_collapse" in text


def test_deterministic_json(tmp_path):
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for p in paths:
        assert run("solve", "--random", "3,7,2", "--seed", "5", "--variant", "physarum",
                   "--h", "0.2", "--eps", "0.1", "--max-iter", "200", "--out", str(p))[0] == 0
    a, b = (json.loads(p.read_text()) for p in paths)
    a.pop("created")
    b.pop("created")
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


def test_theorem_h_run(tmp_path):
    csv = tmp_path / "t.csv"
    code, text = run("solve", "--graph", str(DATA / "parallel_edges.bpgraph"), "--theorem-h",
                     "--eps", "0.2", "--max-iter", "20000", "--csv", str(csv))
    assert code == 0
    assert "h = 0.00125" in text
    assert "check barrier: pass" in text


def test_sweep(tmp_path):
    out = tmp_path / "s.csv"
    code, _ = run("sweep", "--graph", GRAPH, "--h", "0.1,0.5", "--eps", "0.1", "--eps", "0.01",
                  "--max-iter", "60", "--csv", str(out))
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "h,eps,iterations,final_l1_w"
    assert len(lines) == 5
    assert lines[1].split(",")[2] == "55"
    assert lines[2].split(",")[2] == "timeout"
