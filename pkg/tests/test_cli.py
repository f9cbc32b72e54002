import json
import subprocess
import sys

import pytest

from jetpaths.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, json.loads(out), out


def test_check_homogeneity_circle(capsys):
    code, doc, _ = run(capsys, "check-homogeneity", "circle.json")
    assert code == 0 and doc["homogeneous"] is True and doc["lambda"] == ["0", "0"]


def test_check_homogeneity_simple_prints_lambda(capsys):
    code, doc, _ = run(capsys, "check-homogeneity", "circle_simple.json")
    assert code == 0 and doc["lambda"][0] == "0"
    from jetpaths.symexpr import dot, equal_prob, parse, row
    lam2 = parse(doc["lambda"][1], m=2)
    assert equal_prob(lam2, 3 * dot(row(1, 2), row(2, 2)) / dot(row(1, 2), row(1, 2)), order=2, m=2)


def test_check_homogeneity_simplified(capsys):
    pytest.importorskip("sympy")
    code, doc, _ = run(capsys, "check-homogeneity", "circle_simple.json", "--simplify")
    assert code == 0 and "y1_1*y1_2" in doc["lambda"][1].replace(" ", "")


def test_check_homogeneity_negative(capsys):
    code, doc, _ = run(capsys, "check-homogeneity", "nonhom.json")
    assert code == 1 and doc["homogeneous"] is False and doc["cross_residual"] > 0.1


def test_check_zermelo(capsys):
    code, doc, _ = run(capsys, "check-zermelo", "curvature.json")
    assert code == 0 and max(doc["residuals"].values()) < 1e-10


def test_euler_lagrange_verify(capsys):
    code, doc, _ = run(capsys, "euler-lagrange", "curvature.json", "--verify", "curvature_field.json")
    assert code == 0 and doc["residual"] < 1e-7


def test_euler_lagrange_identities(capsys):
    code, doc, _ = run(capsys, "euler-lagrange", "curvature.json")
    assert code == 0 and max(doc["residuals"].values()) < 1e-8


def test_euler_lagrange_extract(capsys):
    pt = "0,0,0,1,0.2,0,0.1,1,0,0.3,0.2,0.5"
    code, doc, _ = run(capsys, "euler-lagrange", "curvature.json", "--extract-at", pt)
    assert code == 0 and len(doc["particular"]) == 3 and len(doc["kernel"]) == 1


def test_regularity(capsys):
    code, doc, _ = run(capsys, "regularity", "curvature.json", "--field", "curvature_field.json", "--samples", "3")
    assert code == 0 and doc["kernel_dims"] == [4, 4, 4]


def test_integrate_writes_csv(capsys, tmp_path):
    out = tmp_path / "c.csv"
    code, doc, _ = run(capsys, "integrate", "circle.json", "--init", "std", "--t1", "1.0", "--h", "0.01",
                       "--out", str(out))
    assert code == 0 and doc["steps"] == 100
    assert out.read_text().splitlines()[0] == "t,y1_0,y2_0,y1_1,y2_1,y1_2,y2_2"


def test_integrate_explicit_init(capsys):
    code, doc, _ = run(capsys, "integrate", "circle.json", "--init", "0,0,1,0,0,2", "--t1", "0.5", "--h", "0.01")
    assert code == 0 and doc["t_final"] == pytest.approx(0.5)


def test_compare_paths_pass(capsys):
    code, doc, _ = run(capsys, "compare-paths", "circle.json", "circle_simple.json", "--init", "std", "--tol", "1e-5")
    assert code == 0 and doc["result"] == "PASS"


def test_compare_paths_required_length_fails(capsys):
    code, doc, _ = run(capsys, "compare-paths", "circle.json", "circle_simple.json", "--length", "6.2832")
    assert code == 1 and doc["result"] == "FAIL"


def test_spray_normalize(capsys):
    code, doc, _ = run(capsys, "spray-normalize", "circle_simple.json", "--at", "0,0,1,0.3,0.2,1")
    assert code == 0 and all(abs(v) < 1e-4 for v in doc["normalized_lambda_by_flow"].values())


@pytest.mark.parametrize("argv,result", [
    (["mul", "--order", "2", "2,1", "3,4"], "6,17"),
    (["inv", "--order", "2", "2,1"], "1/2,-1/8"),
    (["exp", "--order", "2", "0,3"], "1,6"),
    (["exp", "--order", "3", "1/2,1"], "1,1,15/2"),
    (["log", "--order", "3", "1,1,15/2"], "0,1/2,1"),
])
def test_jetgroup(capsys, argv, result):
    code, doc, _ = run(capsys, "jetgroup", *argv)
    assert code == 0 and doc["result"] == result


@pytest.mark.parametrize("argv", [
    ["jetgroup", "mul", "--order", "2", "2,1"],
    ["jetgroup", "mul", "--order", "3", "2,1", "3,4"],
    ["jetgroup", "inv", "--order", "2", "0,1"],
    ["check-homogeneity", "does-not-exist.json"],
    ["check-zermelo", "circle.json"],
    ["integrate", "circle.json", "--init", "1,2,3"],
])
def test_bad_input_exit_code(capsys, argv):
    code, doc, _ = run(capsys, *argv)
    assert code == 2 and "error" in doc


def test_malformed_system_file(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"m": 2, "n": 2, "gamma": ["y1_0", "y3_0"]}))
    code, doc, _ = run(capsys, "check-homogeneity", str(bad))
    assert code == 2 and "y3" in doc["error"] or "index" in doc["error"]
    bad.write_text(json.dumps({"m": 2, "n": 2}))
    code, doc, _ = run(capsys, "check-homogeneity", str(bad))
    assert code == 2


def test_output_is_deterministic(capsys):
    _, _, first = run(capsys, "check-homogeneity", "curvature_field.json", "--seed", "3")
    _, _, second = run(capsys, "check-homogeneity", "curvature_field.json", "--seed", "3")
    assert first == second


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "jetpaths", "jetgroup", "mul", "--order", "2", "2,1", "3,4"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0 and json.loads(res.stdout)["result"] == "6,17"
