import json
import subprocess
import sys

import pytest

from docalc.cli import main
from docalc.formats import format_graph, format_net

from conftest import chain, confounded_net


@pytest.fixture
def files(tmp_path):
    g = tmp_path / "chain.g"
    g.write_text(format_graph(chain()))
    n = tmp_path / "conf.net"
    n.write_text(format_net(confounded_net()))
    return g, n


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_dsep(files, capsys):
    g, _ = files
    code, out, _ = run(capsys, "dsep", "--graph", g, "--a", "X", "--b", "Z", "--given", "Y")
    assert code == 0 and out.strip() == "SEPARATED"
    code, out, _ = run(capsys, "dsep", "--graph", g, "--a", "X", "--b", "Z")
    assert code == 0 and out.splitlines() == ["NOT SEPARATED", "witness: X -> Y -> Z"]
    code, out, _ = run(capsys, "dsep", "--graph", g, "--a", "X", "--b", "Z", "--json")
    assert json.loads(out) == {"separated": False, "witness": "X -> Y -> Z"}


def test_mutilate(files, capsys):
    g, _ = files
    code, out, _ = run(capsys, "mutilate", "--graph", g, "--cut-in", "Y", "--add-roots", "Z", "--json")
    data = json.loads(out)
    assert code == 0
    assert data["edges"] == [["Y", "Z"], ["rt__Z", "Z"]] and data["roots"] == {"Z": "rt__Z"}


def test_intervene(files, capsys):
    _, n = files
    code, out, _ = run(capsys, "intervene", "--net", n, "--do", "X=1", "--target", "Y")
    assert code == 0 and "Y=1  0.74" in out
    code, out, _ = run(capsys, "intervene", "--net", n, "--do", "X=1", "--target", "Y",
                       "--given", "U", "--method", "both", "--json")
    data = json.loads(out)
    assert code == 0 and data["max_discrepancy"] <= 1e-12
    assert len(data["table"]) == 4
    code, out, _ = run(capsys, "intervene", "--net", n, "--do", "X=1", "--target", "Y",
                       "--given", "U=0", "--method", "root-switch", "--json")
    cells = {c["assignment"]["Y"]: c["p"] for c in json.loads(out)["table"]}
    assert cells[1] == pytest.approx(0.6)


def test_rule(files, capsys):
    g, n = files
    code, out, _ = run(capsys, "rule", "--graph", g, "--rule", "1", "--b", "Z", "--a", "X", "--i", "Y")
    assert code == 0 and out.splitlines()[0] == "APPLICABLE (rule 1)"
    assert out.splitlines()[1] == "edges: X -> Y, Y -> Z"
    code, out, _ = run(capsys, "rule", "--net", n, "--rule", "2", "--b", "Y", "--a", "X")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "NOT APPLICABLE (rule 2)"
    assert lines[2] == "witness: Y <- U -> X" and lines[3].startswith("max deviation:")
    code, out, _ = run(capsys, "rule", "--net", n, "--rule", "3", "--b", "Y", "--a", "X", "--i", "U", "--json")
    data = json.loads(out)
    assert data["applicable"] is False and data["numeric"]["checked_cells"] == 8


def test_user_errors(files, capsys):
    g, n = files
    code, _, err = run(capsys, "dsep", "--graph", g, "--a", "X", "--b", "Z", "--bogus")
    assert code == 1 and "usage:" in err
    code, _, err = run(capsys, "frobnicate")
    assert code == 1 and "usage:" in err
    code, _, err = run(capsys, "dsep", "--graph", g.parent / "missing.g", "--a", "X", "--b", "Z")
    assert code == 1 and "error" in err
    code, _, err = run(capsys, "dsep", "--graph", g, "--a", "X", "--b", "X")
    assert code == 1
    code, _, err = run(capsys, "intervene", "--net", n, "--do", "X", "--target", "Y")
    assert code == 1
    code, _, err = run(capsys, "intervene", "--net", n, "--do", "X=7", "--target", "Y")
    assert code == 1
    code, _, err = run(capsys, "rule", "--rule", "1", "--b", "Y", "--a", "X")
    assert code == 1
    code, _, err = run(capsys, "fuzz", "--trials", "0")
    assert code == 1


def test_check_failure_exit_code(files, capsys):
    _, n = files
    code, _, _ = run(capsys, "intervene", "--net", n, "--do", "X=1", "--target", "Y",
                     "--method", "both", "--tol", "-1")
    assert code == 2
    code, _, _ = run(capsys, "fuzz", "--trials", "40", "--seed", "1", "--threshold", "-1")
    assert code == 2


def test_fuzz_report(tmp_path, capsys):
    out_file = tmp_path / "r.json"
    code, out, _ = run(capsys, "fuzz", "--trials", "25", "--seed", "42", "--out", out_file)
    assert code == 0
    assert out_file.read_text() == out
    assert json.loads(out)["status"] == "PASS"


def test_module_entry_point(files):
    g, _ = files
    res = subprocess.run([sys.executable, "-m", "docalc", "dsep", "--graph", str(g), "--a", "X", "--b", "Z",
                          "--given", "Y"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.strip() == "SEPARATED"
