import csv
import io
import json
import math
import subprocess
import sys

import pytest

from fbl_lab.cli import main, run
from fbl_lab.experiments import CSV_COLUMNS
from fbl_lab.fvl import delta, psum, scale
from fbl_lab.spaces import NormedSpace

from oracles import harmonic, lorentz_weak_norm_by_k


def ok(argv):
    code, text = run(argv)
    assert code == 0, text
    return text


def test_atomdual_basis_prints_four():
    assert ok(["atomdual", "--space", "l1:4", "--p", "inf", "--atoms", "basis",
               "--format", "text"]).strip() == "4.0"
    out = json.loads(ok(["atomdual", "--space", "l1:4", "--p", "inf", "--atoms", "basis"]))
    assert out["value"] == 4.0 and out["schema"] == "fbl-lab/1" and out["command"] == "atomdual"


def test_weak_lp_witness_json():
    out = json.loads(ok(["exp", "remark68", "--p", "2", "--n", "16"]))
    assert out["R"] == pytest.approx(math.sqrt(harmonic(16)), rel=1e-12)
    assert out["value"] == out["R"]


def test_norm_of_lorentz_vector():
    x = [1, 0.7071, 0.5774, 0.5]
    out = json.loads(ok(["norm", "--space", "lorentzweak:2:4", "--x", "1,0.7071,0.5774,0.5"]))
    assert out["value"] == pytest.approx(lorentz_weak_norm_by_k(x, 2), rel=1e-14)


def test_byte_identical_reruns():
    for argv in (["exp", "id-ratio", "--space", "l2:2", "--p", "1", "--q", "2", "--trials", "2",
                  "--seed", "3"],
                 ["fblnorm", "lower", "--space", "l1:2", "--p", "2",
                  "--expr", json.dumps(psum(2, [delta(NormedSpace.lq(1, 2), [1, 0]),
                                                delta(NormedSpace.lq(1, 2), [0.5, 1])]).to_json())],
                 ["weakp", "--space", "l2:3", "--p", "3", "--tuple", "1,0,2;0,1,-1"]):
        assert ok(argv) == ok(argv)


def test_other_commands_run():
    e = json.dumps(delta(NormedSpace.lq(2, 2), [0.6, 0.8]).to_json())
    lo = json.loads(ok(["fblnorm", "sandwich", "--space", "l2:2", "--expr", e]))
    assert lo["lower"] == pytest.approx(1.0, rel=1e-9)
    up = json.loads(ok(["fblnorm", "upper", "--space", "l2:2", "--p", "2", "--expr", e,
                        "--grid", "180"]))
    assert up["value"] == pytest.approx(1.0, rel=0.02)
    res = json.loads(ok(["atomdual-upperp", "--space", "lorentzweak:2:4", "--p", "2"]))
    assert res["value"] == pytest.approx(2.0, rel=1e-12)
    assert json.loads(ok(["pap", "build", "--space", "l2:2", "--sectors", "8"]))["residual"] < 1e-9
    ap = json.loads(ok(["pap", "apply", "--space", "l2:2", "--expr", e, "--sectors", "8"]))
    assert len(ap["coefficients"]) == 8
    ver = json.loads(ok(["pap", "verify", "--space", "l2:2", "--expr", e, "--p", "2",
                         "--grid", "180"]))
    assert set(ver["report"]) >= {"diam", "omega", "bound", "measured", "excess"}
    assert json.loads(ok(["exp", "remark67", "--n", "5"]))["value"] == 5.0
    assert json.loads(ok(["weakp", "--space", "l1:2", "--p", "1", "--tuple", "1,0;0,1"]))[
        "value"] == pytest.approx(1.0)


def test_csv_rows():
    text = ok(["exp", "cor65", "--p", "2", "--n-list", "4,16,64", "--format", "csv"])
    rows = list(csv.DictReader(io.StringIO(text)))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert [int(r["n"]) for r in rows] == [4, 16, 64]
    flat = list(csv.DictReader(io.StringIO(ok(["norm", "--space", "l2:2", "--x", "3,4",
                                               "--format", "csv"]))))
    assert float(flat[0]["value"]) == 5.0


def test_out_file(tmp_path):
    path = tmp_path / "r.json"
    code, text = run(["exp", "remark67", "--n", "3", "--out", str(path)])
    assert code == 0 and text == ""
    assert json.loads(path.read_text())["b"] == 3.0


@pytest.mark.parametrize("argv", [
    [],
    ["nope"],
    ["norm", "--space", "l2:3", "--x", "1,2"],
    ["norm", "--space", "bogus:2", "--x", "1,2"],
    ["norm", "--space", "l2:2"],
    ["fblnorm", "sandwich", "--space", "l2:2", "--expr", "{not json"],
    ["fblnorm", "lower", "--space", "l2:2", "--p", "0.5", "--expr", '{"op": "delta", "e": [1, 0]}'],
    ["exp", "remark68", "--p", "2", "--n", "1"],
    ["pap", "build", "--space", "l2:2", "--sectors", "2"],
])
def test_validation_exit_code(argv):
    code, text = run(argv)
    assert code == 1
    assert json.loads(text)["error"] in ("validation", "error")


def test_numerical_exit_code(capsys):
    f = scale(1e300, scale(1e300, delta(NormedSpace.lq(2, 2), [1, 0])))
    argv = ["fblnorm", "sandwich", "--space", "l2:2", "--expr", json.dumps(f.to_json())]
    assert main(argv) == 2
    err = capsys.readouterr().err
    assert json.loads(err)["error"] == "numerical"


def test_expression_from_file(tmp_path):
    path = tmp_path / "f.json"
    path.write_text(json.dumps(delta(NormedSpace.lq(1, 2), [2, -1]).to_json()))
    out = json.loads(ok(["fblnorm", "sandwich", "--space", "l1:2", "--expr", f"@{path}"]))
    assert out["lower"] == pytest.approx(3.0, rel=1e-9)


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "fbl_lab.cli", "exp", "remark67", "--n", "2",
                           "--format", "text"], capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and proc.stdout.strip() == "2.0"
