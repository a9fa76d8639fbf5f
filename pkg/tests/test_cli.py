import json
import subprocess
import sys

import pytest

from sasaki_soliton.cli import RunConfig, cmd_report_matrix, cmd_verify, main, matrix_json
from sasaki_soliton.errors import InvalidArgument
from sasaki_soliton.report import VerificationReport


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_theorem1_passes_with_lambda_six(capsys):
    code, out, _ = run(capsys, "verify", "theorem1", "--model", "heisenberg:n=1", "--samples", "8", "--format", "json")
    assert code == 0
    rep = VerificationReport.from_json(out)
    assert rep.passed
    assert abs(rep.fitted["lambda"].value - 6.0) < 1e-10


def test_unattainable_tolerance_fails(capsys):
    code, out, _ = run(capsys, "verify", "theorem1", "--model", "heisenberg:n=1", "--samples", "4", "--tolerance", "1e-30")
    assert code == 1
    assert "FAIL" in out


def test_universal_on_random_metric(capsys):
    code, out, _ = run(capsys, "verify", "universal", "--model", "random:dim=3,seed=7", "--samples", "4")
    assert code == 0
    assert "lie-nabla-commutation" in out and "lie-curvature-commutation" in out


@pytest.mark.parametrize(
    "argv",
    [
        ["verify", "axioms", "--model", "sphere"],
        ["verify", "nonsense"],
        ["verify", "axioms", "--samples", "0"],
        ["verify", "axioms", "--tolerance", "-1"],
        ["verify", "axioms", "--model", "heisenberg:n=x"],
        ["frobnicate"],
    ],
)
def test_usage_errors(capsys, argv):
    code, _, _ = run(capsys, *argv)
    assert code == 2


def test_capability_error_for_low_order(capsys):
    code, _, err = run(capsys, "verify", "theorem1", "--order", "1", "--samples", "2")
    assert code == 3
    assert "order" in err


def test_not_applicable_suite_exits_nonzero(capsys):
    code, out, _ = run(capsys, "verify", "theorem1", "--model", "random:dim=3", "--samples", "2", "--format", "json")
    assert code == 1
    assert json.loads(out)["classification"] == "not-applicable"


def test_n_override_and_output_file(tmp_path, capsys):
    path = tmp_path / "rep.json"
    code, out, _ = run(
        capsys, "verify", "lemma1", "--model", "heisenberg", "--n", "2", "--samples", "3", "--format", "json",
        "--output", str(path),
    )
    assert code == 0 and out == ""
    rep = VerificationReport.from_json(path.read_text())
    assert rep.model == "heisenberg:n=2"
    assert abs(rep.fitted["c"].value + 12.0) < 1e-10


def test_json_round_trip():
    code, rep = cmd_verify(RunConfig(suite="integrability", samples=3))
    assert code == 0
    again = VerificationReport.from_json(rep.to_json())
    assert again.to_json() == rep.to_json()
    assert again.to_dict() == rep.to_dict()


def test_verify_is_deterministic():
    cfg = RunConfig(suite="theorem2", model="heisenberg:n=2", samples=4, seed=3)
    assert cmd_verify(cfg)[1].to_json() == cmd_verify(cfg)[1].to_json()


def test_run_config_validation():
    with pytest.raises(InvalidArgument):
        RunConfig(order=4)
    with pytest.raises(InvalidArgument):
        RunConfig(format="xml")


def test_small_matrix():
    code, matrix = cmd_report_matrix(
        RunConfig(command="matrix", samples=3), ("heisenberg:n=1", "random:dim=3"), ("theorem1", "universal")
    )
    assert code == 0
    cells = matrix["cells"]
    assert cells["heisenberg:n=1"]["theorem1"]["status"] == "pass"
    assert cells["random:dim=3,seed=0"]["theorem1"]["status"] == "n/a"
    assert cells["random:dim=3,seed=0"]["universal"]["status"] == "pass"
    assert json.loads(matrix_json(matrix)) == json.loads(matrix_json(matrix))


def test_module_entry_point():
    out = subprocess.run(
        [sys.executable, "-m", "sasaki_soliton", "models"], capture_output=True, text=True, check=True
    )
    assert "heisenberg:n=1" in out.stdout
