from __future__ import annotations

import csv
import json
import subprocess
import sys

import pytest

from linforest.cli import BENCH_HEADER, main
from linforest.graph import ForestDecomposition, read_edge_list, verify_decomposition
from linforest.nibble import CSV_HEADER


@pytest.fixture
def rr(tmp_path):
    path = tmp_path / "g.txt"
    assert main(["gen", "--kind", "random-regular", "--n", "200", "--d", "8", "--seed", "1", "--out", str(path)]) == 0
    return path


def test_gen_kinds(tmp_path):
    cases = {
        "complete": ["--n", "5"],
        "circulant": ["--n", "9", "--offsets", "1,3"],
        "complete-bipartite": ["--a", "2", "--b", "3"],
        "cycle": ["--n", "6"],
        "path": ["--n", "4"],
        "star": ["--n", "4"],
        "petersen": [],
    }
    sizes = {"complete": 10, "circulant": 18, "complete-bipartite": 6, "cycle": 6, "path": 3, "star": 4, "petersen": 15}
    for kind, extra in cases.items():
        out = tmp_path / f"{kind}.txt"
        assert main(["gen", "--kind", kind, *extra, "--out", str(out)]) == 0
        assert read_edge_list(out).m == sizes[kind]


@pytest.mark.parametrize("method", ["baseline", "main", "spectral", "vizing"])
def test_decompose_then_verify(rr, tmp_path, method, capsys):
    out, rep = tmp_path / "f.json", tmp_path / "r.json"
    assert main(["decompose", "--method", method, "--in", str(rr), "--out", str(out), "--report", str(rep)]) == 0
    dec = ForestDecomposition.from_json(out.read_text())
    assert verify_decomposition(read_edge_list(rr), dec).valid
    assert json.loads(rep.read_text())["count"] == dec.count
    capsys.readouterr()
    assert main(["verify", "--in", str(rr), "--forests", str(out)]) == 0
    verdict = json.loads(capsys.readouterr().out)
    assert verdict == {"valid": True, "count": dec.count, "lower_bound": 5}


def test_verify_rejects_bad_decomposition(rr, tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"n": 200, "forests": [[[0, 1]]]}))
    assert main(["verify", "--in", str(rr), "--forests", str(bad)]) == 1
    assert json.loads(capsys.readouterr().out)["valid"] is False


def test_oracle_subcommand(tmp_path, capsys):
    path = tmp_path / "k4.txt"
    main(["gen", "--kind", "complete", "--n", "4", "--out", str(path)])
    assert main(["oracle", "--in", str(path)]) == 0
    assert capsys.readouterr().out.strip() == "2"
    big = tmp_path / "k8.txt"
    main(["gen", "--kind", "complete", "--n", "8", "--out", str(big)])
    assert main(["oracle", "--in", str(big)]) == 2


def test_partition_subcommand(rr, tmp_path):
    out = tmp_path / "p.json"
    assert main(["partition", "--in", str(rr), "--t", "2", "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert sorted(sum(data["parts"], [])) == list(range(200))


def test_nibble_stats(rr, tmp_path):
    out = tmp_path / "n.csv"
    code = main(["nibble-stats", "--in", str(rr), "--epsilon", "0.5", "--palette-tol", "10", "--out", str(out)])
    assert code == 0
    rows = list(csv.reader(out.open()))
    assert rows[0] == CSV_HEADER and rows[1][0] == "0"


def test_nibble_stats_failure_exit(rr, tmp_path, capsys):
    out = tmp_path / "n.csv"
    code = main(["nibble-stats", "--in", str(rr), "--epsilon", "0.1", "--palette-tol", "1e-6",
                 "--retries", "1", "--out", str(out)])
    assert code == 1
    assert json.loads(capsys.readouterr().err)["error"] == "nibble_failure"
    assert list(csv.reader(out.open()))[0] == CSV_HEADER


def test_bench(tmp_path):
    out = tmp_path / "b.csv"
    assert main(["bench", "--n", "64", "--d", "4,8", "--methods", "vizing,main", "--seeds", "0", "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert list(rows[0]) == BENCH_HEADER and len(rows) == 4


def test_error_exit_codes(tmp_path, capsys):
    assert main(["verify", "--in", str(tmp_path / "missing.txt"), "--forests", "x"]) == 2
    assert json.loads(capsys.readouterr().err)["error"] == "io"
    assert main(["bench", "--methods", "magic"]) == 2
    assert main(["gen", "--kind", "random-regular", "--n", "5", "--d", "3"]) == 2
    assert main(["decompose"]) == 2


def test_byte_identical_runs(rr, tmp_path):
    outs = []
    for k in range(2):
        out = tmp_path / f"f{k}.json"
        main(["decompose", "--method", "main", "--seed", "3", "--in", str(rr), "--out", str(out)])
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_module_entry_point(rr):
    res = subprocess.run([sys.executable, "-m", "linforest", "decompose", "--method", "vizing", "--in", str(rr)],
                         capture_output=True, text=True, check=True)
    assert json.loads(res.stdout)["n"] == 200
