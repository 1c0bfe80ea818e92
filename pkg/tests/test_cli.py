import json
import os
import subprocess
import sys

import jsonschema
import pytest

from coulomb_sobolev.cli import EXIT_INVALID, EXIT_MISMATCH, EXIT_OK, main
from coulomb_sobolev.radial import RadialGridFunction
from coulomb_sobolev.schemas import schema_for


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def report(capsys, *argv):
    code, out, err = run(capsys, *argv)
    assert code == EXIT_OK, err
    doc = json.loads(out)
    jsonschema.validate(doc, schema_for(doc["kind"]))
    return doc


def test_exponents_model_case(capsys):
    doc = report(capsys, "exponents", "--d", "3", "--s", "1", "--alpha", "2", "--q", "2")
    b = doc["bundle"]
    assert (b["p_endpoint"], b["p_sobolev"], b["p_rad_exact"]) == (3, 6, "18/7")
    assert b["p_interval"]["text"] == "[3, 6]"
    assert b["p_interval_radial"]["text"] == "(18/7, 6]"
    assert doc["config"]["alpha"] == "2"


def test_exponents_critical_line_warns(capsys):
    doc = report(capsys, "exponents", "--q", "5")
    assert any("CriticalQ" in w for w in doc["bundle"]["warnings"])


def test_exponents_closed_at_q(capsys):
    doc = report(capsys, "exponents", "--d", "2", "--s", "0.25", "--alpha", "1.5", "--q", "4")
    assert doc["bundle"]["p_rad"] == 4
    assert doc["bundle"]["p_interval_radial"]["text"] == "[8/3, 4]"


def test_invalid_parameters_exit_2(capsys):
    code, _, err = run(capsys, "exponents", "--alpha", "3")
    assert code == EXIT_INVALID
    assert "alpha" in err


def test_bounded_outside_interval_refused(capsys):
    code, out, err = run(capsys, "bounded", "--p", "7")
    assert code == EXIT_INVALID and out == ""
    assert "outside the valid radial interval (18/7, 6]" in err


def test_sweep_blow_up_match(capsys):
    doc = report(capsys, "sweep", "--schedule", "table2-row1", "--p", "2.4")
    assert doc["verdict"] == "Match"
    assert doc["fitted_slope"] == pytest.approx(0.15, rel=0.1)


def test_sweep_csv(capsys):
    code, out, _ = run(capsys, "sweep", "--bump-law", "S", "--p", "3", "--format", "csv")
    assert code == EXIT_OK
    lines = out.split("\r\n")
    assert lines[0] == "axis_value,lp_p,seminorm_sq,coulomb,quotient,quotient_p"
    assert len([x for x in lines if x]) == 10


def test_mismatch_exit_3(capsys):
    code, out, _ = run(capsys, "bounded", "--p", "4", "--corpus-size", "8", "--threshold", "1")
    assert code == EXIT_MISMATCH
    doc = json.loads(out)
    jsonschema.validate(doc, schema_for("corpus_set"))
    assert doc["bounded"] is False


def test_energy_bump(capsys):
    doc = report(capsys, "energy", "--profile", "bump", "--lambda", "1", "--R", "10",
                 "--S", "1", "--p", "3")
    assert doc["quotient"] > 0 and not doc["degenerate"]
    assert doc["lp_p"] == pytest.approx(doc["lp_norm"] ** 3)


def test_energy_from_file(capsys, tmp_path):
    path = tmp_path / "profile.txt"
    code, _, _ = run(capsys, "optimize", "--starts", "1", "--p", "4",
                     "--export", str(path))
    assert code == EXIT_OK
    f = RadialGridFunction.from_text(path.read_text())
    assert f.d == 3
    doc = report(capsys, "energy", "--profile", "file", "--input", str(path), "--p", "4")
    # the exported candidate is normalized
    assert doc["seminorm_sq"] == pytest.approx(1.0, rel=1e-8)
    code, _, err = run(capsys, "energy", "--profile", "file", "--input", str(path),
                       "--p", "4", "--d", "4")
    assert code == EXIT_INVALID and "dimension" in err


def test_optimize_report_and_trace(capsys, tmp_path):
    trace = tmp_path / "trace.jsonl"
    doc = report(capsys, "optimize", "--starts", "2", "--p", "4",
                 "--trace", str(trace), "--check-gradients")
    assert doc["best"]["status"] == "Converged"
    assert doc["start_spread"] < 0.01
    assert max(doc["gradient_check"].values()) < 1e-5
    lines = trace.read_text().splitlines()
    assert len(lines) == doc["best"]["iterations"] + 1


def test_optimize_endpoint_refused(capsys):
    code, _, err = run(capsys, "optimize", "--p", "6")
    assert code == EXIT_INVALID and "endpoint" in err


def test_weighted_report(capsys):
    doc = report(capsys, "weighted", "--s", "0.25", "--corpus-size", "6")
    assert "rubin_limiting" in doc["reports"]


def test_multibump_report(capsys):
    doc = report(capsys, "multibump", "--rescaled")
    assert doc["axis"] == "m" and doc["verdict"] == "Match"


def test_threads_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("CSL_THREADS", "2")
    doc = report(capsys, "bounded", "--p", "4", "--corpus-size", "6")
    monkeypatch.setenv("CSL_THREADS", "1")
    single = report(capsys, "bounded", "--p", "4", "--corpus-size", "6")
    key = next(iter(doc["reports"]))
    assert doc["reports"][key]["values"] == single["reports"][key]["values"]
    monkeypatch.setenv("CSL_THREADS", "many")
    code, _, err = run(capsys, "bounded", "--p", "4", "--corpus-size", "6")
    assert code == EXIT_INVALID and "CSL_THREADS" in err


def test_bad_seed_is_a_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["bounded", "--p", "4", "--seed", "abc"])
    assert exc.value.code == EXIT_INVALID


def test_console_script_is_byte_identical(tmp_path):
    argv = [sys.executable, "-m", "coulomb_sobolev", "bounded", "--p", "4",
            "--corpus-size", "12", "--seed", "99"]
    env = {**os.environ, "CSL_THREADS": "1"}
    a = subprocess.run(argv, capture_output=True, env=env, check=True).stdout
    b = subprocess.run(argv, capture_output=True, env=env, check=True).stdout
    assert a == b and len(a) > 100
