import csv
import io
import json
import subprocess
import sys

import pytest

from fmlab.cli import build_parser, run


def _run(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


# ---------------------------------------------------------------------------
# documented invocations


def test_doubling_csv(capsys):
    code, out, _ = _run(capsys, "doubling", "--weight", "exp:c=1", "--p", "2", "--tau", "2", "--R", "4,8,16",
                        "--format", "csv")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["schema=1"]
    header = rows[1]
    for col in ("weight", "p", "tau", "R", "inf_ratio"):
        assert col in header
    vals = [float(r[header.index("inf_ratio")]) for r in rows[2:]]
    assert len(vals) == 3 and vals[0] < vals[1] < vals[2]
    assert all(r[header.index("weight")] == "exp:c=1" for r in rows[2:])


def test_ap_constant_weight(capsys):
    code, out, _ = _run(capsys, "ap", "--weight", "const:c=1", "--p", "2", "--K", "6")
    assert code == 0
    data = json.loads(out)
    assert data["schema"] == 1 and data["meta"]["passed"]
    assert all(r["ap"] == pytest.approx(1.0, abs=1e-14) for r in data["rows"])


def test_scenario_two_classes(capsys):
    code, out, _ = _run(capsys, "scenario", "two-classes", "--depth", "8", "--mmax", "5")
    assert code == 0
    data = json.loads(out)
    assert data["meta"]["scenario"] == "two-classes" and data["meta"]["passed"]
    assert all(r["passed"] for r in data["rows"])


# ---------------------------------------------------------------------------
# other subcommands


def test_witness_and_mnorm(capsys):
    code, out, _ = _run(capsys, "witness", "--j", "1:5:1")
    assert code == 0 and len(json.loads(out)["rows"]) == 5
    code, out, _ = _run(capsys, "mnorm", "--symbol", "lorentz:scale=2", "--N", "128")
    row = json.loads(out)["rows"][0]
    assert code == 0 and row["norm"] == pytest.approx(row["sup_abs_symbol"], rel=1e-10)


def test_probe_and_kernelbound(capsys):
    code, out, _ = _run(capsys, "probe", "--L", "32", "--N", "1024", "--eta", "0,1", "--delta", "1,0.5")
    data = json.loads(out)
    assert code == 0 and [r["eta"] for r in data["rows"]] == [0.0, 1.0]
    assert data["meta"]["delta"] == [1.0, 0.5]
    code, out, _ = _run(capsys, "kernelbound", "--alpha", "0.5", "--weight", "exp:c=4")
    assert code == 0 and json.loads(out)["rows"][0]["bound"] == pytest.approx(0.5)
    code, out, _ = _run(capsys, "kernelbound", "--weight", "const", "--caveat")
    assert code == 0 and json.loads(out)["rows"][0]["finite"] is False


def test_lebesgue_and_young(capsys):
    code, out, _ = _run(capsys, "lebesgue", "--eta", "0", "--N", "8192", "--L", "128")
    assert code == 0 and all(r["decreasing"] for r in json.loads(out)["rows"])
    code, out, _ = _run(capsys, "young", "--preset", "w2", "--draws", "5", "--p", "3")
    assert code == 0 and all(r["holds"] for r in json.loads(out)["rows"])


# ---------------------------------------------------------------------------
# exit codes


@pytest.mark.parametrize("argv", [
    ["doubling", "--weight", "exp:c=0"],
    ["doubling", "--weight", "gauss:c=1"],
    ["doubling", "--p", "0.5"],
    ["mnorm", "--N", "100"],
    ["mnorm", "--symbol", "wave"],
    ["probe", "--eta", "a,b"],
    ["doubling", "--seed", "-1"],
    ["frobnicate"],
    [],
])
def test_usage_errors_exit_one(capsys, argv):
    with pytest.raises(SystemExit) as info:
        run(argv)
    assert info.value.code == 1
    err = capsys.readouterr().err
    assert "weight grammar" in err


def test_runtime_value_error_exits_one(capsys):
    code, _, err = _run(capsys, "ap", "--p", "1")
    assert code == 1 and "fmlab ap" in err


def test_numeric_failure_exits_two(capsys):
    # alpha2 = 1.5 grows too slowly for the 1e6 threshold on the x0 > 0 side
    code, out, err = _run(capsys, "scenario", "superexp-triviality", "--alpha2", "1.5", "--x0", "2,-2",
                          "--eps", "0.5")
    assert code == 2
    assert "FAILED" in err and "first k" in err
    assert json.loads(out)["meta"]["passed"] is False


def test_weight_overflow_exits_two(capsys):
    # e^(2L) for L = 400 overflows the dense weight ratio
    code, _, err = _run(capsys, "mnorm", "--weight", "exp:c=1", "--L", "400", "--N", "512")
    assert code == 2 and "numeric failure" in err


# ---------------------------------------------------------------------------
# output invariants


def test_byte_identical_outputs(tmp_path, capsys):
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for p in paths:
        assert run(["young", "--draws", "4", "--seed", "7", "--out", str(p)]) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()
    other = tmp_path / "c.json"
    run(["young", "--draws", "4", "--seed", "8", "--out", str(other)])
    assert other.read_bytes() != paths[0].read_bytes()
    assert sorted(q.name for q in tmp_path.iterdir()) == ["a.json", "b.json", "c.json"]


def test_scenario_csv_has_provenance(capsys):
    code, out, _ = _run(capsys, "scenario", "nondoubling-growth", "--format", "csv")
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0 and rows[0] == ["schema=1"] and rows[1][:2] == ["scenario", "params"]
    assert json.loads(rows[2][1])["tau"] == 2.0


def test_help_lists_defaults():
    parser = build_parser()
    sub = next(a for a in parser._actions if a.dest == "command")
    for name, sp in sub.choices.items():
        text = " ".join(sp.format_help().split())
        for action in sp._actions:
            if action.option_strings and action.default not in (None, False, "==SUPPRESS=="):
                assert f"(default: {action.default})" in text, (name, action.dest)


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "fmlab", "ap", "--K", "4", "--format", "csv"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0 and res.stdout.startswith("schema=1\n")
    res = subprocess.run([sys.executable, "-m", "fmlab", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.startswith("fmlab ")
