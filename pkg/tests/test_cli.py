import csv
import io
import json
import math
import os
import subprocess
import sys
from pathlib import Path

import pytest

from widthlab.cli import main, parse_eps_grid
from widthlab.hadamard import construct

GOLDEN = Path(__file__).parent / "golden"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_eps_grid_inclusive():
    g = parse_eps_grid("0.1:2.2:0.1")
    assert len(g) == 22 and g[0] == 0.1 and g[-1] == 2.2 and 1.6 in g


def test_table_grid_example(capsys):
    code, out, _ = run(capsys, "table", "--n", "3", "--p", "2", "--metric", "lp", "--eps-grid", "0.1:2.2:0.1")
    assert code == 0
    assert out.splitlines()[0] == "n,p,metric,eps,lo,hi,sources"
    r = rows(out)
    assert len(r) == 22
    row = next(x for x in r if float(x["eps"]) == 1.6)
    assert (row["lo"], row["hi"]) == ("3", "3")


def test_table_sup_example(capsys):
    code, out, _ = run(capsys, "table", "--n", "4", "--p", "1", "--metric", "sup", "--eps", "1.0")
    (row,) = rows(out)
    assert code == 0 and (row["lo"], row["hi"]) == ("1", "1")


def test_table_trivial_example(capsys):
    code, out, _ = run(capsys, "table", "--n", "1", "--p", "2", "--eps", "3")
    (row,) = rows(out)
    assert code == 0 and (row["lo"], row["hi"]) == ("0", "0")


def test_table_json_schema(capsys):
    code, out, _ = run(capsys, "table", "--n", "3", "--p", "1", "--eps", "1.2", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["schema"] == 1
    assert doc["rows"][0]["lo"] == doc["rows"][0]["hi"] == 3


@pytest.mark.parametrize(
    "argv",
    [
        ["table", "--n", "0", "--eps", "1"],
        ["table", "--n", "3", "--eps", "-1"],
        ["table", "--n", "3"],
        ["table", "--n", "3", "--eps-grid", "1:0:0.1"],
        ["table", "--n", "3", "--p", "0.5", "--eps", "1"],
        ["search"],
        ["nonsense"],
        ["fibers", "--map", "cascade", "--n", "3", "--j", "2"],
        ["embed", "--map", "cascade", "--n", "5", "--j", "3"],
        ["search", "--n", "3", "--p", "2", "--family", "one_over"],
    ],
)
def test_usage_errors_exit_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert "error" in err


def test_embed_collapse_example(capsys):
    code, out, _ = run(capsys, "embed", "--map", "collapse", "--j", "1", "--point", "0.5,-0.2,0.1")
    (row,) = rows(out)
    assert code == 0
    assert [float(row[f"x{i}"]) for i in range(3)] == pytest.approx([0.4, -0.1, 0.0], abs=1e-15)
    assert list(row) == ["index", "x0", "x1", "x2", "norm"]


def test_embed_cascade_random(capsys):
    code, out, _ = run(capsys, "embed", "--map", "cascade", "--n", "5", "--j", "2", "--samples", "200")
    assert code == 0 and len(rows(out)) == 200
    assert all(float(r["norm"]) <= 1 + 1e-9 for r in rows(out))


def test_fibers_example(capsys):
    code, out, err = run(capsys, "fibers", "--map", "cascade", "--n", "3", "--j", "1", "--p", "2", "--target", "0", "--samples", "100000")
    assert code == 0
    d = float(err.strip().split("=")[1])
    assert math.sqrt(8 / 3) * 0.99 <= d <= math.sqrt(8 / 3) + 1e-9
    assert len(rows(out)) > 90_000


def test_fibers_n4_j2(capsys):
    code, out, err = run(capsys, "fibers", "--map", "cascade", "--n", "4", "--j", "2", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["schema"] == 1 and doc["diameter"] < 2


def test_fibers_collapse(capsys):
    code, out, err = run(capsys, "fibers", "--map", "collapse", "--n", "4", "--j", "2", "--p", "1", "--samples", "2000", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["metric"] == "inf"
    assert doc["diameter"] <= 2 / 3 + 1e-9


def test_search_family(capsys):
    code, out, _ = run(capsys, "search", "--n", "3", "--p", "inf", "--family", "one_over")
    doc = json.loads(out)
    assert code == 0 and doc["diameter"] == 1.5 and doc["schema"] == 1


def test_search_n2(capsys):
    code, out, _ = run(capsys, "search", "--n", "2", "--p", "2")
    doc = json.loads(out)
    assert code == 0 and abs(doc["diameter"] - math.sqrt(3)) <= 1e-3
    assert set(doc) >= {"points", "diameter", "bound", "gap", "certificate"}


def test_search_n3_p1(capsys):
    code, out, _ = run(capsys, "search", "--n", "3", "--p", "1", "--restarts", "64")
    doc = json.loads(out)
    assert code == 0 and doc["gap"] <= 1e-3


def test_search_bound_violation_exits_1(capsys, monkeypatch):
    from widthlab import hemisphere_search

    monkeypatch.setattr(hemisphere_search, "diameter_bound", lambda n, p: 3.0)
    code, _, err = run(capsys, "search", "--n", "2", "--p", "2", "--restarts", "2")
    assert code == 1 and "bound violated" in err


@pytest.mark.parametrize("suite", ["hadamard", "bounds", "embeddings"])
def test_verify_suites(capsys, suite):
    code, out, _ = run(capsys, "verify", "--suite", suite)
    assert code == 0
    assert "FAIL" not in out and "checks passed" in out


def test_verify_fibers_example(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "fibers", "--n", "3", "--p", "1", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["passed"]
    claim = next(c for c in doc["checks"] if "within 1%" in c["claim"])
    assert claim["passed"] and "1.333333333" in claim["claim"]


def test_verify_failure_exits_1(capsys, monkeypatch):
    from widthlab import hadamard

    monkeypatch.setattr(hadamard, "hadamard_set_diameter", lambda order, p: 0.0)
    code, out, _ = run(capsys, "verify", "--suite", "hadamard")
    assert code == 1 and "FAIL" in out


def test_output_file(tmp_path, capsys):
    target = tmp_path / "t.csv"
    code, out, _ = run(capsys, "table", "--n", "2", "--eps", "1.0", "-o", str(target))
    assert code == 0 and out == "" and target.read_text().startswith("n,p,metric")


# golden files ----------------------------------------------------------------


@pytest.mark.parametrize(
    "name,argv",
    [
        ("table_n3_p2.csv", ["table", "--n", "3", "--p", "2", "--metric", "lp", "--eps-grid", "0.1:2.2:0.1"]),
        ("table_n2_p1.5.json", ["table", "--n", "2", "--p", "1.5", "--metric", "lp", "--eps-grid", "0.5:2.5:0.25", "--format", "json"]),
        ("embed_collapse.csv", ["embed", "--map", "collapse", "--j", "1", "--point", "0.5,-0.2,0.1"]),
        ("fibers_n3.csv", ["fibers", "--map", "cascade", "--n", "3", "--j", "1", "--p", "2", "--samples", "500", "--seed", "3"]),
        ("search_family.json", ["search", "--n", "3", "--p", "inf", "--family", "one_over"]),
    ],
)
def test_golden(capsys, name, argv):
    code, out, _ = run(capsys, *argv)
    assert code == 0
    assert out == (GOLDEN / name).read_text()


@pytest.mark.parametrize("order", [8, 12, 20])
def test_hadamard_text_golden(order):
    assert construct(order).to_text() == (GOLDEN / f"hadamard_{order}.txt").read_text()


def test_bit_stable_across_processes_and_threads():
    argv = [sys.executable, "-m", "widthlab.cli", "fibers", "--map", "cascade", "--n", "4", "--j", "2", "--samples", "9000", "--seed", "2"]
    outs = set()
    for threads in ("1", "3"):
        env = dict(os.environ, WIDTHLAB_THREADS=threads)
        res = subprocess.run(argv, capture_output=True, text=True, env=env, check=True)
        outs.add(res.stdout + res.stderr)
    assert len(outs) == 1


def test_console_script_help():
    res = subprocess.run([sys.executable, "-m", "widthlab.cli", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "table" in res.stdout
