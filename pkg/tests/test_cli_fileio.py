import io
import json
import subprocess
import sys

import pytest

from btransit import census, decor, fileio
from btransit.cli import run
from btransit.kernel import signature


def _run(*argv):
    buf = io.StringIO()
    code = run([str(a) for a in argv], buf)
    return code, json.loads(buf.getvalue())


@pytest.fixture
def m004_files(tmp_path):
    t = census.get("m004")
    tri = tmp_path / "m004.json"
    fileio.save_triangulation(t, tri)
    bs = []
    for k, b in enumerate(decor.enumerate_branchings(t)):
        p = tmp_path / f"b{k}.json"
        p.write_text(fileio.dumps(b.to_json()))
        bs.append(p)
    w = tmp_path / "w0.json"
    w.write_text(fileio.dumps(decor.enumerate_prebranchings(t)[0].to_json()))
    return tri, bs, w


def test_validate_ok(m004_files):
    tri, _, _ = m004_files
    code, doc = _run("validate", tri)
    assert code == 0
    assert doc["valid"] and doc["tetrahedra"] == 2 and doc["edges"] == 2
    assert doc["signature"] == signature(census.get("m004"))


def test_validate_reports_violations(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("1 0123 1 0123 1 0123 1 0123\n0 0123 0 0123 0 0123 0 1023\n")
    code, doc = _run("validate", bad)
    assert code == 1
    assert doc["valid"] is False


def test_parse_error_location(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("# header\n1 0123 1 0123 1 12x3 1 0123\n")
    code, doc = _run("validate", bad)
    assert code == 1
    assert doc["error"] == "ParseError"
    assert (doc["line"], doc["column"]) == (2, 17)


def test_parse_plain_token_count():
    with pytest.raises(fileio.ParseError) as exc:
        fileio.parse_plain("1 0123 1 0123\n")
    assert exc.value.line == 1


def test_usage_errors(m004_files):
    tri, bs, w = m004_files
    assert _run()[0] == 64
    assert _run("frobnicate")[0] == 64
    assert _run("invariants", tri, "--branching", bs[0], "--prebranching", w)[0] == 64
    assert _run("connect", tri, "--from", w, "--to", bs[0])[0] == 64


def test_outcome_exit_codes(m004_files):
    tri, bs, _ = m004_files
    # m003 carries no branching
    code, doc = _run("explore", "m003", "--relation", "full-b")
    assert code == 2 and doc["error"] == "NotFound"
    code, doc = _run("explore", tri, "--branching", bs[0], "--depth", "4", "--budget", "5")
    assert code == 2 and doc["error"] == "BudgetExceeded"
    assert doc["components"]


def test_missing_file():
    code, doc = _run("validate", "/nonexistent/tri.json")
    assert code == 1 and doc["error"] == "OSError"


def test_census_types():
    code, doc = _run("census-types")
    assert code == 0
    assert doc["configurations"] == 120 and doc["types"] == 40
    assert doc["classes"] == {"NonAmbiguous": 20, "AmbiguousSliding": 8,
                              "ForcedAmbiguous": 4, "Bump": 8}
    assert doc["schaeffer_types"] == 4


def test_invariants_with_branching(m004_files):
    tri, bs, _ = m004_files
    code, doc = _run("invariants", tri, "--branching", bs[0])
    assert code == 0
    assert doc["h1"]["group"] == "Z"
    assert doc["omega_class"]["zero"] and doc["omega_class"]["even"]
    assert doc["euler_sum"] == 0 and doc["cone"]["dim"] == 0


def test_connect_then_apply(m004_files, tmp_path):
    tri, bs, _ = m004_files
    moves = tmp_path / "moves.json"
    code, doc = _run("connect", tri, "--from", bs[0], "--to", bs[1], "--ideal", "--out", moves)
    assert code == 0 and doc["ideal"]
    assert json.loads(moves.read_text()) == doc
    code, out = _run("apply", tri, "--moves", moves, "--branching", bs[0])
    assert code == 0
    t = fileio.load_triangulation(str(tri))
    b1 = fileio.load_decoration(t, str(bs[1]))
    assert out["signature"] == signature(t, b1)


def test_census_import_round_trip(tmp_path):
    t = census.get("m003")
    plain = tmp_path / "m003.txt"
    plain.write_text(fileio.tri_to_plain(t))
    out = tmp_path / "m003.json"
    code, doc = _run("census-import", plain, "--out", out)
    assert code == 0
    again = fileio.import_census(str(out))
    assert signature(again) == signature(t)
    assert fileio.tri_to_plain(again) == plain.read_text()


def test_decoration_json_round_trip():
    t = census.get("m004")
    for d in decor.enumerate_branchings(t) + decor.enumerate_prebranchings(t):
        doc = json.loads(fileio.dumps(d.to_json()))
        assert fileio.decoration_from_json(t, doc) == d


@pytest.mark.parametrize("kind,count", [("branchings", 4), ("prebranchings", 6)])
def test_enumerate_counts(kind, count):
    code, doc = _run("enumerate", "m004", "--kind", kind)
    assert code == 0
    assert doc["count"] == len(doc["items"]) == count
    t = census.get("m004")
    for item in doc["items"]:
        fileio.decoration_from_json(t, item)


def test_console_module_entry(m004_files):
    tri, _, _ = m004_files
    proc = subprocess.run([sys.executable, "-m", "btransit.cli", "validate", str(tri)],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["valid"]
