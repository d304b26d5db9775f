"""Command-line driver: exit codes, artifacts, manifests, config handling."""

import csv
import json

import pytest

from momray.cli import EXIT_CHECK, EXIT_INVALID, EXIT_OK, EXIT_USAGE, main


def run(args):
    return main(args)


def test_coeffs_beta_table(tmp_path, capsys):
    out = tmp_path / "o"
    code = run(["--out", str(out), "coeffs", "--beta", "4"])
    assert code == EXIT_OK
    rows = list(csv.DictReader((out / "beta.csv").open()))
    wanted = [r for r in rows if (r["m"], r["k"], r["p"]) == ("2", "1", "1")]
    assert wanted and wanted[0]["numerator"] == "-3" and wanted[0]["denominator"] == "1"
    assert "m,k,p,numerator,denominator" in capsys.readouterr().out
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == "coeffs"
    assert "momray" in manifest["versions"]


def test_coeffs_without_request_is_usage_error(tmp_path):
    assert run(["--out", str(tmp_path / "o"), "coeffs"]) == EXIT_USAGE


def test_check_beta_suite(tmp_path, capsys):
    out = tmp_path / "o"
    code = run(["--out", str(out), "check", "--suite", "beta", "--max-m", "6"])
    assert code == EXIT_OK
    assert (out / "beta_check.json").exists()


def test_check_unknown_suite_is_usage_error(tmp_path):
    code = run(["--out", str(tmp_path / "o"), "check", "--suite", "nonsense"])
    assert code == EXIT_USAGE


def test_unknown_subcommand_exits_64(tmp_path):
    with pytest.raises(SystemExit) as exc:
        run(["--out", str(tmp_path / "o"), "frobnicate"])
    assert exc.value.code == EXIT_USAGE


def test_invalid_phantom_is_data_error(tmp_path):
    # phantom wider than the box: rejected with the invalid-input code
    code = run(["--out", str(tmp_path / "o"), "forward", "--m", "0",
                "--shape", "64", "--extent", "4.0", "--width", "1.5"])
    assert code == EXIT_INVALID


def test_missing_config_file_is_data_error(tmp_path):
    code = run(["--config", str(tmp_path / "absent.json"),
                "--out", str(tmp_path / "o"), "coeffs", "--beta", "2"])
    assert code == EXIT_INVALID


def test_forward_then_adjoint_pipeline(tmp_path):
    out = tmp_path / "o"
    code = run(["--out", str(out), "forward", "--m", "1", "--k", "0",
                "--shape", "64", "--extent", "8.0", "--width", "0.5"])
    assert code == EXIT_OK
    sino = out / "sinogram_m1_k0.bin"
    assert sino.exists()
    code = run(["--out", str(out), "adjoint", "--m", "1", "--shape", "64",
                "--extent", "8.0", "--sinogram", str(sino)])
    assert code == EXIT_OK
    assert (out / "backprojection_m1_k0.bin").exists()


def test_slicecheck_passes_on_smooth_phantom(tmp_path, capsys):
    out = tmp_path / "o"
    code = run(["--out", str(out), "slicecheck", "--m", "1", "--k", "1",
                "--shape", "128", "--extent", "8.0", "--width", "0.5",
                "--n-dir", "90"])
    assert code == EXIT_OK
    assert "slice residual" in capsys.readouterr().out
    assert (out / "slicecheck.json").exists()


def test_roundtrip_scalar_and_budget_failure(tmp_path, capsys):
    out = tmp_path / "o"
    base = ["--out", str(out), "roundtrip", "--m", "0", "--shape", "128",
            "--extent", "8.0", "--width", "0.5", "--center", "0.0,0.0"]
    assert run(base) == EXIT_OK
    assert (out / "reconstruction_m0.bin").exists()
    assert (out / "error_slices.csv").exists()
    capsys.readouterr()
    # an absurdly small budget must flip the exit code, not crash
    assert run(base + ["--budget", "1e-9"]) == EXIT_CHECK


def test_config_file_supplies_defaults(tmp_path):
    out = tmp_path / "o"
    cfgfile = tmp_path / "cfg.json"
    cfgfile.write_text(json.dumps({"beta": 3}))
    code = run(["--config", str(cfgfile), "--out", str(out), "coeffs"])
    assert code == EXIT_OK
    rows = list(csv.DictReader((out / "beta.csv").open()))
    assert max(int(r["m"]) for r in rows) == 3


def test_manifest_reports_elapsed_and_config(tmp_path):
    out = tmp_path / "o"
    run(["--out", str(out), "coeffs", "--scalars"])
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["elapsed_s"] >= 0
    assert manifest["config"]["scalars"] is True
