"""Command-line dispatch: reports, determinism and exit codes."""
from __future__ import annotations

import json
import subprocess
import sys

import pytest

from amalgam.cli import dispatch
from amalgam import presentation as pr

from conftest import DATA, GOLDEN

SIX_VERTEX = str(DATA / "six-vertex.dyn")
DOM3 = str(DATA / "dominating-n3.dyn")
A3PRES = str(DATA / "a3-f2.pres")
A3DESC = str(DATA / "a3-f2.desc")
SIX_VERTEXDESC = str(DATA / "six-vertex.desc")
CYCLE8 = str(DATA / "cycle8.dyn")


def run(*argv):
    return dispatch(list(argv))


# -- documented examples -----------------------------------------------------------

def test_classify_example():
    code, out, _ = run("classify", "--flavor", "ct", "--q", "2", SIX_VERTEX)
    assert code == 0
    assert out.splitlines()[0] == "2 classes: 1 orientable, 1 non-orientable"


def test_lattice_example():
    code, out, _ = run("lattice", "--q", "3", DOM3)
    assert code == 0
    assert "converges=true" in out.splitlines()
    assert "paper_bound=true" in out.splitlines()


def test_enumerate_example():
    code, out, _ = run("enumerate", "--subgroup", "trivial", A3PRES)
    assert code == 0 and out.splitlines()[0] == "index 20160"


def test_enumerate_descriptor_matches_neutral_file():
    _, a, _ = run("enumerate", A3DESC)
    _, b, _ = run("enumerate", "--method", "felsch", A3PRES)
    assert a.splitlines()[0] == b.splitlines()[0] == "index 20160"


def test_enumerate_overflow_is_domain_error():
    code, _, err = run("enumerate", "--max-cosets", "100", A3PRES)
    assert code == 1 and "100" in err


def test_enumerate_subgroup_index():
    code, out, _ = run("enumerate", "--subgroup", "x1p1; x1m1", A3DESC)
    assert code == 0 and out.splitlines()[0] == f"index {20160 // 6}"


# -- other subcommands ---------------------------------------------------------------

def test_check_and_cover():
    code, out, _ = run("check", CYCLE8)
    assert code == 0 and out.splitlines()[-1] == "ok"
    code, out, _ = run("cover", SIX_VERTEXDESC)
    assert code == 0 and "vertices: 12" in out and "edges: 12" in out


def test_growth_terms():
    code, out, _ = run("growth", "--terms", "5", DOM3)
    assert code == 0 and "coefficients: 1 3 6 12 21 36" in out


def test_twisted_small_radius():
    code, out, _ = run("twisted", "--radius", "4", "--theta", "5,6,7,8,1,2,3,4", CYCLE8)
    assert code == 0 and "equal: true" in out.splitlines()


def test_abelianize_with_relator():
    code, out, _ = run("abelianize", "--relator", "(n3 n4 n5 n6 n5 n4)^2", SIX_VERTEXDESC)
    assert code == 0 and out.strip().endswith("trivial")


def test_export_gap_matches_golden():
    code, out, _ = run("export-gap", "--relator", "(n3 n4 n5 n6 n5 n4)^2", SIX_VERTEXDESC)
    assert code == 0 and out == (GOLDEN / "six-vertex-relator.g").read_text()


def test_present_writes_neutral_file(tmp_path):
    target = tmp_path / "a3.pres"
    code, _, _ = run("present", "-o", str(target), A3DESC)
    assert code == 0
    p = pr.parse_neutral(target.read_text())
    assert target.read_text() == (DATA / "a3-f2.pres").read_text()
    assert len(p.generators) == 6


# -- determinism and json --------------------------------------------------------------

@pytest.mark.parametrize("argv", [
    ("classify", "--q", "2", SIX_VERTEX),
    ("lattice", "--q", "3", DOM3),
    ("growth", DOM3),
    ("check", SIX_VERTEX),
    ("cover", SIX_VERTEXDESC),
    ("present", "--format", "gap", A3DESC),
    ("abelianize", SIX_VERTEXDESC),
    ("twisted", "--radius", "3", "--theta", "5,6,7,8,1,2,3,4", CYCLE8),
])
def test_byte_identical_reruns(argv):
    assert run(*argv) == run(*argv)


def test_json_key_order_is_frozen():
    _, out, _ = run("lattice", "--q", "3", "--json", DOM3)
    data = json.loads(out)
    assert list(data) == ["q", "converges", "omega", "paper_bound", "dominated",
                          "three_spherical"]
    _, out, _ = run("classify", "--q", "2", "--json", SIX_VERTEX)
    assert list(json.loads(out)) == ["flavor", "q", "classes", "orientable", "representatives"]


# -- exit codes --------------------------------------------------------------------------

def test_missing_file(tmp_path):
    code, out, err = run("check", str(tmp_path / "nope.dyn"))
    assert code == 1 and out == "" and "cannot read" in err


def test_malformed_diagram(tmp_path):
    bad = tmp_path / "bad.dyn"
    bad.write_text("v 1\ne 1 2 m=5\n")
    assert run("check", str(bad))[0] == 1
    assert run("classify", "--q", "2", str(bad))[0] == 1


def test_gate_failure_exit(tmp_path):
    d = tmp_path / "triangle.dyn"
    d.write_text("v 1\nv 2\nv 3\ne 1 2 m=3\ne 2 3 m=3\ne 1 3 m=3\n")
    code, out, _ = run("check", str(d))
    assert code == 1 and out.splitlines()[-1] == "rejected"
    assert "offending triple: 1 2 3" in out


@pytest.mark.parametrize("argv", [
    ("frobnicate", SIX_VERTEX),
    ("classify", SIX_VERTEX),
    ("growth",),
    ("enumerate", "--max-cosets", "0", A3PRES),
    ("enumerate", "--method", "coxeter", A3PRES),
])
def test_usage_errors(argv):
    assert run(*argv)[0] == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "amalgam.cli", "classify", "--q", "2", SIX_VERTEX],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("2 classes: 1 orientable")
