import json
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from numrange.cli import run_command
from numrange.errors import DimensionMismatch, Malformed, NonFinite
from numrange.io import (
    parse_frame_text,
    parse_matrix,
    parse_matrix_text,
    points_csv,
    read_points,
    sha256_file,
    svg_plot,
    write_matrix,
    write_points,
)
from numrange.linalg import general_eigs
from numrange.projections import BlockPartition

from conftest import gaussian_matrix


# -- matrix files -------------------------------------------------------------

def test_parse_identity():
    a, part, name = parse_matrix_text('{"n":2,"entries":[[1,0],[0,0],[0,0],[1,0]]}')
    assert np.array_equal(a, np.eye(2)) and part is None and name is None


def test_parse_partition_and_name():
    a, part, name = parse_matrix_text('{"n":2,"partition":[1,1],"name":"I","entries":[[1,0],[0,0],[0,0],[1,0]]}')
    assert part == BlockPartition((1, 1)) and name == "I"


def test_parse_errors():
    with pytest.raises(DimensionMismatch):
        parse_matrix_text('{"n":2,"entries":[[1,0],[0,0],[0,0]]}')
    with pytest.raises(DimensionMismatch):
        parse_matrix_text('{"n":2,"partition":[1,2],"entries":[[1,0],[0,0],[0,0],[1,0]]}')
    with pytest.raises(NonFinite):
        parse_matrix_text('{"n":1,"entries":[[NaN,0]]}')
    with pytest.raises(NonFinite):
        parse_matrix_text('{"n":1,"entries":[[1e999,0]]}')
    with pytest.raises(Malformed, match=r"m\.json:entries\[1\]\[0\]"):
        parse_matrix_text('{"n":2,"entries":[[1,0],["x",0],[0,0],[0,0]]}', "m.json")
    with pytest.raises(Malformed, match=r"m\.json:2:"):
        parse_matrix_text('{"n":1,\n "entries": [[1,0],}', "m.json")
    with pytest.raises(Malformed, match="missing field"):
        parse_matrix_text('{"entries":[]}')
    with pytest.raises(Malformed, match=r":n"):
        parse_matrix_text('{"n":1.5,"entries":[]}')
    with pytest.raises(Malformed):
        parse_matrix_text('{"n":1,"entries":[[1]]}')


def test_parse_is_exact():
    # decimal text parses to the nearest double, the same as float()
    a, _, _ = parse_matrix_text('{"n":1,"entries":[[0.1,-2.5e-310]]}')
    assert a[0, 0] == complex(0.1, -2.5e-310)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32), n=st.integers(1, 6))
def test_matrix_round_trip(seed, n, tmp_path_factory):
    a = gaussian_matrix(n, seed)
    path = tmp_path_factory.mktemp("m") / "a.json"
    write_matrix(path, a, BlockPartition.halves(n), "g")
    b, part, name = parse_matrix(path)
    assert np.array_equal(a, b) and part == BlockPartition.halves(n) and name == "g"


def test_frame_file():
    v = parse_frame_text('{"rows":3,"cols":1,"entries":[[1,0],[1,0],[0,0]]}')
    assert v.shape == (3, 1)
    with pytest.raises(DimensionMismatch):
        parse_frame_text('{"rows":3,"cols":2,"entries":[[1,0]]}')


# -- point files --------------------------------------------------------------

def test_points_csv_format():
    text = points_csv([1 + 0.1j], ["nr#0"])
    header, line = text.splitlines()
    assert header == "re,im,provenance"
    re_, im_, tag = line.split(",")
    assert re_ == "1.0000000000000000e+00" and tag == "nr#0"
    assert len(im_.split("e")[0].replace("-", "").replace(".", "")) == 17


@settings(max_examples=30, deadline=None)
@given(vals=st.lists(st.complex_numbers(allow_nan=False, allow_infinity=False, max_magnitude=1e300),
                     min_size=1, max_size=20))
def test_points_round_trip(vals, tmp_path_factory):
    path = tmp_path_factory.mktemp("p") / "p.csv"
    tags = [f"t#{i}" for i in range(len(vals))]
    write_points(path, vals, tags)
    back, btags = read_points(path)
    # 17 significant digits round-trip doubles exactly
    assert np.array_equal(back, np.array(vals, dtype=complex)) and btags == tags


def test_read_points_errors(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("x,y\n")
    with pytest.raises(Malformed):
        read_points(p)
    p.write_text("re,im,provenance\n1,zz,a\n")
    with pytest.raises(Malformed, match=":2"):
        read_points(p)


def test_svg_is_deterministic():
    a = svg_plot([0, 1j, 1], [0, 1, 1j], "t")
    assert a == svg_plot([0, 1j, 1], [0, 1, 1j], "t")
    assert a.startswith("<svg") and 'width="640"' in a and a.count("<circle") == 3


# -- CLI ----------------------------------------------------------------------

@pytest.fixture
def files(tmp_path):
    d = {}
    write_matrix(tmp_path / "diag.json", np.diag([0.0, 1.0]))
    d["diag"] = tmp_path / "diag.json"
    write_matrix(tmp_path / "g4.json", gaussian_matrix(4, 3), BlockPartition((2, 2)))
    d["g4"] = tmp_path / "g4.json"
    write_matrix(tmp_path / "g3.json", gaussian_matrix(3, 1))
    d["g3"] = tmp_path / "g3.json"
    write_matrix(tmp_path / "g6.json", gaussian_matrix(6, 2))
    d["g6"] = tmp_path / "g6.json"
    d["dir"] = tmp_path
    return d


def run(argv):
    return run_command([str(x) for x in argv])


def test_range_writes_csv_and_manifest(files):
    out = files["dir"] / "pts.csv"
    assert run(["range", files["g4"], "--samples", 1000, "--seed", 7, "--out", out]) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 1001 and lines[1].endswith(",nr#0")
    man = json.loads((files["dir"] / "pts.csv.manifest.json").read_text())
    assert man["seed"] == 7 and man["budgets"]["samples"] == 1000 and man["command"] == "range"
    assert man["input_sha256"] == sha256_file(files["g4"])
    assert man["outputs"][str(out)] == sha256_file(out)
    assert man["tolerances"]["containment"] == 1e-8


def test_manifest_replay_reproduces_bytes(files):
    out = files["dir"] / "b.csv"
    svg = files["dir"] / "b.svg"
    assert run(["boundary", files["g4"], "--angles", 64, "--out", out, "--svg", svg]) == 0
    man = json.loads((files["dir"] / "b.csv.manifest.json").read_text())
    first = {p: sha256_file(p) for p in man["outputs"]}
    assert run(man["argv"]) == 0
    assert {p: sha256_file(p) for p in man["outputs"]} == first == man["outputs"]


def test_stdout_without_out(files, capsys):
    assert run(["bnr", files["g4"], "--samples", 5]) == 0
    text = capsys.readouterr().out
    assert text.splitlines()[0] == "re,im,provenance"
    assert len(text.splitlines()) == 1 + 5 * 2 and "bnr:2,2#4" in text


def test_pnr_full_rank_outputs_spectrum(files, capsys):
    assert run(["pnr", files["g3"], "--family", "rank:3"]) == 0
    lines = capsys.readouterr().out.splitlines()[1:]
    vals = np.array([complex(float(l.split(",")[0]), float(l.split(",")[1])) for l in lines])
    a, _, _ = parse_matrix(files["g3"])
    assert len(vals) == 3 and np.abs(vals - general_eigs(a).values).max() <= 1e-9


def test_pnr_families(files, capsys):
    assert run(["pnr", files["g4"], "--family", "block", "--samples", 3]) == 0
    assert "block:2,2#2" in capsys.readouterr().out
    assert run(["pnr", files["diag"], "--family", "commuting"]) == 0
    assert "commuting#" in capsys.readouterr().out
    assert run(["pnr", files["g4"], "--family", "commuting"]) == 2  # not normal
    assert run(["pnr", files["g4"], "--family", "oblique"]) == 2
    assert run(["pnr", files["g4"], "--family", "rank:9"]) == 2


def test_qnr_and_partitions(files, capsys):
    assert run(["qnr", files["g6"], "--samples", 4]) == 0
    assert "bnr:3,3#3" in capsys.readouterr().out
    assert run(["qnr", files["g6"], "--partition", "2,2,2"]) == 2
    assert run(["bnr", files["g6"], "--partition", "2,2,2", "--samples", 2]) == 0
    assert run(["bnr", files["g6"], "--partition", "2,2"]) == 2
    assert run(["bnr", files["g6"], "--partition", "a,b"]) == 2


def test_compress(files, capsys):
    basis = files["dir"] / "basis.json"
    basis.write_text('{"rows":4,"cols":2,"entries":[[1,0],[0,0],[0,0],[1,0],[0,0],[0,0],[0,0],[0,0]]}')
    mout = files["dir"] / "c.json"
    assert run(["compress", files["g4"], "--basis", basis, "--matrix-out", mout]) == 0
    c, _, _ = parse_matrix(mout)
    a, _, _ = parse_matrix(files["g4"])
    assert np.array_equal(c, a[:2, :2])
    assert capsys.readouterr().out.count("compress#") == 2
    assert run(["compress", files["g4"], "--rank", 3, "--seed", 1]) == 0
    assert run(["compress", files["g4"], "--rank", 5]) == 2


def test_check_exit_codes(files, capsys):
    assert run(["check", files["diag"], "--all", "--seed", 7]) == 0
    table = capsys.readouterr().out
    assert table.splitlines()[0].split() == ["check", "result", "deviation", "tolerance"]
    assert "FAIL" not in table
    report = files["dir"] / "r.json"
    # a zero tolerance on a floating-point identity fails, and the report is still written
    code = run(["check", files["g4"], "--check", "qnr_equivalence", "--tol-transpose", 0,
                "--tol-entrywise", 0, "--out", report])
    assert code == 1
    doc = json.loads(report.read_text())
    assert doc[0]["name"] == "qnr_equivalence" and doc[0]["passed"] is False
    assert run(["check", files["g4"]]) == 2
    assert run(["check", files["g4"], "--check", "two_dim_ellipse"]) == 2


def test_usage_errors(files, capsys):
    assert run(["range", files["dir"] / "missing.json"]) == 2
    assert run(["range", files["g4"], "--samples", 0]) == 2
    assert run(["frobnicate", files["g4"]]) == 2
    bad = files["dir"] / "bad.json"
    bad.write_text('{"n":2,"entries":[[1,0]]}')
    assert run(["range", bad]) == 2
    assert "error" in capsys.readouterr().err


def test_every_command_is_byte_identical(files):
    cmds = [
        ["range", files["g4"], "--samples", 300, "--seed", 2],
        ["boundary", files["g4"], "--angles", 32],
        ["pnr", files["g4"], "--family", "rank:2", "--samples", 50, "--seed", 3],
        ["qnr", files["g4"], "--samples", 50],
        ["bnr", files["g6"], "--partition", "1,2,3", "--samples", 50, "--seed", 4],
        ["compress", files["g4"], "--rank", 2, "--seed", 5],
    ]
    for i, cmd in enumerate(cmds):
        a, b = files["dir"] / f"{i}a.csv", files["dir"] / f"{i}b.csv"
        assert run(cmd + ["--out", a]) == 0 and run(cmd + ["--out", b]) == 0
        assert a.read_bytes() == b.read_bytes()


def test_module_entry_point(files):
    proc = subprocess.run([sys.executable, "-m", "numrange", "range", str(files["diag"]), "--samples", "3"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and proc.stdout.count("\n") == 4
