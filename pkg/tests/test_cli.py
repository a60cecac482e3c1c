"""End-to-end runs of the batch CLI: exit codes, files, digests, schemas."""

import hashlib
import json
from pathlib import Path

import numpy.testing as npt
import pytest

from nbodylab.cli import main
from nbodylab.reporting import validate_payload


def run_ok(argv, capsys):
    """Run the CLI, assert success, return the created run directory."""
    code = main(argv)
    out = capsys.readouterr().out
    assert code == 0
    run_dir = Path(out.strip().splitlines()[-1])
    assert run_dir.is_dir()
    return run_dir


def only_run_dir(base: Path) -> Path:
    dirs = [p for p in Path(base).iterdir() if p.is_dir()]
    assert len(dirs) == 1
    return dirs[0]


def check_manifest(run_dir: Path) -> dict:
    manifest = json.loads((run_dir / "manifest.json").read_text())
    validate_payload(manifest, "manifest")
    assert manifest["outputs"]
    for name, digest in manifest["outputs"].items():
        assert hashlib.sha256((run_dir / name).read_bytes()).hexdigest() == digest
    return manifest


def test_solve_cc_equal_masses_reports_obstructed_spectrum(tmp_path, capsys):
    run_dir = run_ok(["solve-cc", "--masses", "1,1,1", "--out", str(tmp_path)],
                     capsys)
    payload = json.loads((run_dir / "solve_cc.json").read_text())
    validate_payload(payload, "solve_cc")
    npt.assert_allclose(payload["spectrum"]["eigenvalues"], [0.0, 2.0, 4.8],
                        atol=1e-9)
    assert payload["spectrum"]["matches"] == [1, 2, None]
    assert payload["spectrum"]["obstructed"] is True
    npt.assert_allclose(payload["multiplier"], -1.0, rtol=1e-12)
    header = (run_dir / "eigenvalues.csv").read_text().splitlines()[0]
    assert header == "index,eigenvalue,admissible_match"
    check_manifest(run_dir)


def test_ek_writes_exact_masses_at_unit_rho(tmp_path, capsys):
    run_dir = run_ok(["ek", "--k", "5", "--rho", "1", "--out", str(tmp_path)],
                     capsys)
    payload = json.loads((run_dir / "ek.json").read_text())
    validate_payload(payload, "ek")
    assert [m["numerator"] for m in payload["masses"]] == [12, 11, 12]
    assert [m["denominator"] for m in payload["masses"]] == [35, 35, 35]
    assert payload["positive"] is True
    assert payload["spectrum_error"] <= 1e-12
    lines = (run_dir / "masses.csv").read_text().splitlines()
    assert lines[0] == "body,numerator,denominator,value"
    assert len(lines) == 4
    check_manifest(run_dir)


def test_ek_invalid_k_exits_2_with_error_json(tmp_path, capsys):
    code = main(["ek", "--k", "7", "--rho", "1", "--out", str(tmp_path)])
    err = capsys.readouterr().err
    assert code == 2
    assert "InvalidKError" in err
    run_dir = only_run_dir(tmp_path)
    payload = json.loads((run_dir / "error.json").read_text())
    validate_payload(payload, "error")
    assert payload["error"]["type"] == "InvalidKError"
    assert not (run_dir / "manifest.json").exists()


def test_planar_equal_masses_is_obstructed(tmp_path, capsys):
    run_dir = run_ok(["planar", "--masses", "1,1,1", "--out", str(tmp_path)],
                     capsys)
    payload = json.loads((run_dir / "planar.json").read_text())
    validate_payload(payload, "planar")
    npt.assert_allclose(payload["eigenvalues"],
                        [-2.4, -1.0, 0.0, 0.0, 2.0, 4.8], atol=1e-9)
    assert payload["verdict"] == "obstructed"
    assert payload["block_error"] <= 1e-10
    check_manifest(run_dir)


def test_sweep_small_grid_writes_rows_and_digests(tmp_path, capsys):
    run_dir = run_ok(["sweep", "--rho-max", "4", "--cells", "25",
                      "--no-refine", "--out", str(tmp_path)], capsys)
    payload = json.loads((run_dir / "sweep.json").read_text())
    validate_payload(payload, "sweep")
    assert payload["violations"] == 0
    assert payload["global_max"] < 70.0
    assert "numerical evidence" in payload["caveat"]
    lines = (run_dir / "sweep.csv").read_text().splitlines()
    assert lines[0] == "rho1,rho2,which_Mi,m3_at_max,trace_max"
    assert len(lines) == payload["row_count"] + 1
    check_manifest(run_dir)


def test_sweep_runs_are_byte_identical(tmp_path, capsys):
    outs = []
    for sub in ("a", "b"):
        run_dir = run_ok(["sweep", "--rho-max", "3", "--cells", "20",
                          "--no-refine", "--out", str(tmp_path / sub)], capsys)
        outs.append(run_dir)
    for name in ("sweep.json", "sweep.csv"):
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()


def test_pairs_symmetric_mode_finds_the_four_feasible(tmp_path, capsys):
    run_dir = run_ok(["pairs", "--mode", "symmetric", "--out", str(tmp_path)],
                     capsys)
    payload = json.loads((run_dir / "pairs.json").read_text())
    validate_payload(payload, "pairs")
    assert payload["counts"] == {"enumerated": 26, "feasible": 4,
                                 "excluded-by-Z0": 22}
    feasible = {tuple(p["pair"]) for p in payload["pairs"]
                if p["status"] == "feasible"}
    assert feasible == {(5, 9), (5, 14), (9, 27), (14, 44)}
    lines = (run_dir / "pairs.csv").read_text().splitlines()
    assert lines[0] == "lambda1,lambda2,status,min_abs_z0,order2_conditions"
    assert len(lines) == 27
    check_manifest(run_dir)


def test_simulate_five_body_trajectory_columns(tmp_path, capsys):
    run_dir = run_ok(["simulate", "--model", "five-body", "--t-end", "5",
                      "--samples", "101", "--out", str(tmp_path)], capsys)
    payload = json.loads((run_dir / "simulate.json").read_text())
    validate_payload(payload, "simulate")
    assert payload["model"] == "five-body"
    assert payload["dof"] == 4
    assert max(payload["drift"].values()) <= 1e-9
    lines = (run_dir / "trajectory.csv").read_text().splitlines()
    header = lines[0].split(",")
    assert header[:9] == ["t", "q0", "q1", "q2", "q3", "p0", "p1", "p2", "p3"]
    assert header[9:] == ["pair_energy_1", "pair_energy_2",
                          "pair_angular_momentum_1", "pair_angular_momentum_2",
                          "energy"]
    assert len(lines) == 102
    check_manifest(run_dir)


def test_simulate_init_json_defines_the_model(tmp_path, capsys):
    init = tmp_path / "orbit.json"
    init.write_text(json.dumps({"model": "kepler", "kappa": 2.0, "dof": 2,
                                "t_end": 3.0}))
    run_dir = run_ok(["simulate", "--init-json", str(init), "--samples", "51",
                      "--out", str(tmp_path / "runs")], capsys)
    payload = json.loads((run_dir / "simulate.json").read_text())
    assert payload["model"] == "kepler"
    assert payload["dof"] == 2
    assert payload["t_end"] == 3.0
    assert payload["samples"] == 51


def test_check_subspace_builtin_five_body(tmp_path, capsys):
    run_dir = run_ok(["check-subspace", "--builtin", "five-body",
                      "--out", str(tmp_path)], capsys)
    payload = json.loads((run_dir / "check_subspace.json").read_text())
    validate_payload(payload, "check_subspace")
    assert payload["samples"] == 50
    assert payload["max_leakage"] <= 1e-9
    assert payload["within_threshold"] is True
    lines = (run_dir / "leakage.csv").read_text().splitlines()
    assert lines[0] == "sample,leakage"
    assert len(lines) == 51
    check_manifest(run_dir)


def test_check_subspace_custom_json(tmp_path, capsys):
    s = 2.0 ** -0.5
    spec = {"masses": [1.0, 1.0], "d": 2, "label": "mirror pair",
            "basis_rows": [[s, 0.0, -s, 0.0], [0.0, s, 0.0, -s]]}
    custom = tmp_path / "subspace.json"
    custom.write_text(json.dumps(spec))
    run_dir = run_ok(["check-subspace", "--json", str(custom),
                      "--out", str(tmp_path / "runs")], capsys)
    payload = json.loads((run_dir / "check_subspace.json").read_text())
    assert payload["label"] == "mirror pair"
    assert payload["max_leakage"] <= 1e-12


def test_body_count_mismatch_exits_1(tmp_path, capsys):
    code = main(["solve-cc", "--masses", "1,1,1", "--n", "4",
                 "--out", str(tmp_path)])
    err = capsys.readouterr().err
    assert code == 1
    assert "does not match" in err


def test_malformed_masses_exit_1(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["solve-cc", "--masses", "1,x,3", "--out", str(tmp_path)])
    assert exc.value.code == 1


def test_unknown_flag_exits_1(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["ek", "--k", "5", "--rho", "1", "--bogus", "--out", str(tmp_path)])
    assert exc.value.code == 1


def test_missing_model_choice_exits_1(tmp_path, capsys):
    code = main(["simulate", "--out", str(tmp_path)])
    err = capsys.readouterr().err
    assert code == 1
    assert "--model" in err or "init-json" in err


def test_help_enumerates_subcommands_and_flags(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--help"])
    assert exc.value.code == 0
    top = capsys.readouterr().out
    for name in ("solve-cc", "ek", "sweep", "pairs", "planar", "simulate",
                 "check-subspace"):
        assert name in top
    with pytest.raises(SystemExit) as exc:
        main(["simulate", "--help"])
    assert exc.value.code == 0
    sim = capsys.readouterr().out
    for flag in ("--model", "--t-end", "--samples", "--rtol", "--init-json",
                 "--q0", "--p0", "--out"):
        assert flag in sim


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert "nbodylab" in capsys.readouterr().out


def test_unwritable_out_directory_exits_1(tmp_path, capsys):
    blocked = tmp_path / "blocked"
    blocked.write_text("file in the way")
    code = main(["solve-cc", "--masses", "1,1", "--out", str(blocked)])
    err = capsys.readouterr().err
    assert code == 1
    assert "cannot create run directory" in err
