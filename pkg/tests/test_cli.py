import io
import json
import subprocess
import sys

import pytest

from tropmaps.cli import normalize_argv, run


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    rc = run(list(argv), out, err)
    return rc, out.getvalue(), err.getvalue()


def test_normalize_argv():
    assert normalize_argv(["descendant", "--x", "-6,3,2,1"]) == ["descendant", "--x=-6,3,2,1"]
    assert normalize_argv(["--x", "2,1,-2,-1"]) == ["--x", "2,1,-2,-1"]


def test_descendant_golden():
    rc, out, _ = call("descendant", "--x", "-6,3,2,1", "--insert", "k=2", "--insert", "k=1,pt=0",
                      "--insert", "k=0,pt=1")
    assert rc == 0
    assert out.splitlines()[0] == "12"
    assert "contributing types: 6" in out


def test_descendant_json_schema():
    rc, out, _ = call("--format", "json", "descendant", "--x", "-6,3,2,1", "--insert", "k=2",
                      "--insert", "k=1,pt=0", "--insert", "k=0,pt=1")
    data = json.loads(out)
    assert rc == 0 and data["value"] == 12
    assert all(set(t) == {"tree", "assignment", "multiplicity"} for t in data["types"])


def test_descendant_evaluation_index_flag():
    rc, out, _ = call("descendant", "--x", "2,1,-2,-1", "--insert", "k=1,pt=0", "--insert", "k=1,pt=1",
                      "--evaluation-index")
    assert rc == 0 and out.splitlines()[0] == "4"


def test_subdivide_alpha(tmp_path):
    path = tmp_path / "alpha.json"
    rc, out, _ = call("subdivide", "--x", "-4,-4,5,1,1,1", "--tree", "1,4;1,3,4;5,6", "--out", str(path))
    assert rc == 0
    assert "maximal cones: 5" in out and "new rays: 3" in out
    data = json.loads(path.read_text())
    assert len(data["cones"]) == 5 and len(data["provenance"]) == 5
    rc, out, _ = call("check", "--subdivision", str(path), "--against", "1,4;1,3,4;5,6")
    assert rc == 0 and out.strip() == "subdivision: true"
    rc, out, _ = call("check", "--subdivision", str(path), "--against", "3,4;1,3,4;5,6")
    assert rc == 1 and out.startswith("subdivision: false")


def test_subdivide_full_and_balancing(tmp_path):
    path = tmp_path / "rub.json"
    rc, out, _ = call("subdivide", "--x", "3,1,-2,-1,-1", "--out", str(path))
    assert rc == 0
    rc, out, _ = call("check", "--balancing", str(path))
    assert rc == 0
    assert "fan: true" in out and "unbalanced faces: 0" in out


def test_check_balancing_fails_on_single_cone(tmp_path):
    path = tmp_path / "one.json"
    call("subdivide", "--x", "-4,-4,5,1,1,1", "--tree", "1,4;1,3,4;5,6", "--out", str(path))
    rc, out, _ = call("check", "--balancing", str(path))
    assert rc == 1


def test_check_errors(tmp_path):
    rc, _, err = call("check", "--subdivision", str(tmp_path / "missing.json"), "--against", "1,2")
    assert rc == 2 and "cannot read" in err
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    rc, _, err = call("check", "--balancing", str(bad))
    assert rc == 2
    rc, _, _ = call("check", "--subdivision", str(bad))
    assert rc == 2


def test_hurwitz_number_oracle():
    rc, out, _ = call("hurwitz-number", "--x", "2,1,-2,-1", "--oracle")
    assert rc == 0
    assert out.splitlines() == ["tropical 4", "oracle 4", "equal true"]
    rc, out, _ = call("hurwitz-number", "--x", "2,1,-2,-1")
    assert rc == 0 and out.strip() == "4"


def test_sweep_tsv_independent_of_jobs():
    rc1, out1, _ = call("hurwitz-number", "--sweep", "4", "--max-n", "5")
    rc2, out2, _ = call("--jobs", "2", "hurwitz-number", "--sweep", "4", "--max-n", "5")
    assert rc1 == rc2 == 0
    assert out1 == out2
    lines = out1.splitlines()
    assert lines[0] == "x\td\tr\toracle\ttropical\tequal"
    assert all(line.endswith("\ttrue") for line in lines[1:])


def test_types_and_trees(tmp_path):
    rc, out, _ = call("types", "--x", "-4,-4,5,1,1,1", "--tree", "1,4;1,3,4;5,6")
    assert rc == 0 and "5 orders" in out and "gap 1:" in out
    dot = tmp_path / "t.dot"
    rc, out, _ = call("trees", "--n", "5", "--trivalent", "--dot", str(dot))
    assert rc == 0 and out.splitlines()[0] == "15 trees"
    assert dot.read_text().count("graph ") == 15


def test_stellar_replay():
    rc, out, _ = call("stellar-replay", "--x", "-4,-4,5,1,1,1", "--tree", "1,4;1,3,4;5,6")
    assert rc == 0
    assert out.count("step ") == 3
    assert out.splitlines()[-1] == "replay reproduces 5 cones: yes"


def test_hurwitz_cycle(tmp_path):
    path = tmp_path / "cyc.json"
    rc, out, _ = call("hurwitz-cycle", "--x", "3,1,-2,-1,-1", "--k", "0", "--points", "0,1,3",
                      "--out", str(path))
    assert rc == 0 and "degree: 54" in out
    assert json.loads(path.read_text())["k"] == 0
    rc, out, _ = call("hurwitz-cycle", "--x", "1,1,-1,-1", "--k", "1", "--points", "0")
    assert rc == 0 and "balanced: true" in out


def test_usage_errors():
    assert call("bogus")[0] == 2
    assert call("descendant", "--nope")[0] == 2
    rc, _, err = call("descendant", "--x", "-6,3,2,1", "--insert", "k=2", "--insert", "k=1,pt=0.5",
                      "--insert", "k=0,pt=1")
    assert rc == 2 and "decimal" in err
    rc, _, err = call("descendant", "--x", "-6,3,2,1", "--insert", "k=0,pt=1")
    assert rc == 2
    rc, _, err = call("subdivide", "--x", "1,1,1,1,1,1,1,-7")
    assert rc == 2 and "single tree" in err
    rc, _, err = call("hurwitz-number", "--x", "9,-9,1,-1", "--oracle")
    assert rc == 2 and "oracle limit" in err
    assert call("subdivide", "--x", "1,1,-1,-1", "--tree", "1,2;1,3")[0] == 2


def test_output_is_deterministic():
    args = ("--format", "json", "subdivide", "--x", "-4,-4,5,1,1,1", "--tree", "1,4;1,3,4;5,6")
    assert call(*args)[1] == call(*args)[1]


@pytest.mark.slow
def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "tropmaps", "hurwitz-number", "--x", "2,1,-2,-1", "--oracle"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0 and "equal true" in proc.stdout
