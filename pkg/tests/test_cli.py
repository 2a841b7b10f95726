import json
import subprocess
import sys

import pytest

from legvar import __version__, studies
from legvar.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_identities_pass(capsys):
    code, out, _ = run_cli(capsys, "identities", "--n", "200")
    rep = json.loads(out)
    assert code == 0 and rep["passed"]
    assert rep["version"] == __version__
    assert rep["config"]["seed"] == 0 and rep["config"]["params"]["n"] == 200
    assert rep["tolerances"] == studies.DEFAULT_TOLERANCES


def test_output_is_byte_identical(capsys, tmp_path):
    # the output path is part of the recorded config, so reuse it
    path = tmp_path / "a.json"
    blobs = []
    for _ in range(2):
        assert main(["counterexample", "--k", "2,4", "--seed", "3", "--out", str(path)]) == 0
        blobs.append(path.read_bytes())
    assert blobs[0] == blobs[1]
    _, out1, _ = run_cli(capsys, "identities", "--n", "100", "--seed", "5")
    _, out2, _ = run_cli(capsys, "identities", "--n", "100", "--seed", "5")
    assert out1 == out2


def test_pass_set_stable_across_seeds(capsys):
    sets = set()
    for seed in range(10):
        _, out, _ = run_cli(capsys, "identities", "--n", "300", "--seed", str(seed))
        rep = json.loads(out)
        sets.add(tuple(c["name"] for c in rep["result"]["checks"] if c["passed"]))
    assert len(sets) == 1 and len(next(iter(sets))) == len(studies.DEFAULT_TOLERANCES)


def test_corrupted_tolerance_names_the_check(capsys):
    code, out, err = run_cli(capsys, "identities", "--n", "100", "--tol", "monotonicity_identity=1e-30")
    assert code == 1
    assert "monotonicity_identity" in err
    failed = [c["name"] for c in json.loads(out)["result"]["checks"] if not c["passed"]]
    assert failed == ["monotonicity_identity"]


def test_usage_errors(capsys):
    assert run_cli(capsys, "counterexample", "--panel", "")[0] == 2
    assert run_cli(capsys, "counterexample", "--panel", "nope")[0] == 2
    assert run_cli(capsys, "counterexample", "--k", "1,2")[0] == 2
    assert run_cli(capsys, "surface", "--family", "clifford", "--grid", "64,32")[0] == 2
    assert run_cli(capsys, "identities", "--tol", "bogus=1")[0] == 2
    assert run_cli(capsys, "density", "--family", "plane", "--radii", "0.3,0.9")[0] == 2
    assert run_cli(capsys, "density")[0] == 2
    assert run_cli(capsys, "nonsense")[0] == 2


def test_malformed_csv_reports_line(capsys, tmp_path):
    v = studies.builtin_varifold("plane")[0]
    lines = v.to_csv().splitlines()
    lines[3] = lines[3].replace(",", ",x", 1)
    bad = tmp_path / "bad.csv"
    bad.write_text("\n".join(lines) + "\n")
    code, _, err = run_cli(capsys, "density", "--input", str(bad), "--radii", "1.0,0.5")
    assert code == 2 and "line 4" in err
    code, _, err = run_cli(capsys, "density", "--input", str(tmp_path / "missing.csv"), "--radii", "1,0.5")
    assert code == 2


def test_density_from_file(capsys, tmp_path):
    v = studies.builtin_varifold("plane")[0]
    path = tmp_path / "plane.csv"
    v.to_csv(str(path))
    code, out, _ = run_cli(capsys, "density", "--input", str(path), "--center", "0,0,0,0,0",
                           "--radii", "1.2,0.9,0.6,0.4")
    assert code == 0
    assert json.loads(out)["result"]["input"] == str(path)


def test_csv_formats(capsys):
    heads = {
        ("identities", "--n", "50"): "name,value,tol,passed",
        ("counterexample", "--k", "2,4", "--panel", "one"): "k,observable_id,pairing,limit,abs_err",
        ("density", "--family", "plane"): "radius,theta,theta_limit_integrand,valid",
        ("surface", "--family", "appendix", "--k", "3", "--grid", "64,128"): "quantity,n,value",
    }
    for argv, head in heads.items():
        code, out, _ = run_cli(capsys, *argv, "--format", "csv")
        assert code == 0, argv
        assert out.splitlines()[0] == head


def test_surface_report_embeds_checks(capsys):
    code, out, _ = run_cli(capsys, "surface", "--family", "clifford")
    rep = json.loads(out)
    assert code == 0
    assert set(rep["result"]["checks"]) == {"legendrian_residual", "conformality_residual", "isometry_defect",
                                            "dirichlet_energy", "stationarity"}
    assert rep["tolerances"]["energy_rel"] == 2e-3


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "legvar", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and __version__ in proc.stdout
