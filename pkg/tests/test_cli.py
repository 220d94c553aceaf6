"""Command-line behavior: exit codes, file outputs, reproducibility."""

import json
import math
import os

import numpy as np
import pytest

from superfact import (
    IdentitySpec,
    PhasePoint,
    TOL_POLY,
    cli,
    hamiltonian,
    higher_integral,
    second_integral,
)

TWO_PI = 2 * math.pi


def _read_csv(path):
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    header = lines[0].split(",")
    rows = [line.split(",") for line in lines[1:]]
    return header, rows


def _column(header, rows, name):
    k = header.index(name)
    return np.array([float(r[k]) for r in rows])


# ---------- catalog ----------


def test_catalog_lists_all_families(capsys):
    assert cli.main(["catalog"]) == 0
    out = capsys.readouterr().out
    for family in ("euclidean", "sphere", "ttw"):
        assert f"{family}:" in out


def test_catalog_single_family_text(capsys):
    assert cli.main(["catalog", "--family", "sphere"]) == 0
    out = capsys.readouterr().out
    assert "gamma bound       gamma >= 1/2" in out
    assert "euclidean:" not in out


def test_catalog_json(capsys):
    assert cli.main(["catalog", "--json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert [e["family"] for e in data["families"]] == ["euclidean", "sphere", "ttw"]
    ttw = data["families"][2]
    assert ttw["gamma_bound"] == "gamma >= 1/4"


def test_catalog_unknown_family(capsys):
    assert cli.main(["catalog", "--family", "torus"]) == 2
    assert "error" in capsys.readouterr().err


def test_no_subcommand_prints_help(capsys):
    assert cli.main([]) == 2
    assert "usage" in capsys.readouterr().out.lower()


# ---------- verify ----------


def test_verify_pass(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    code = cli.main(
        [
            "verify",
            "--system", "euclidean",
            "--gamma", "2",
            "--samples", "150",
            "--seed", "3",
            "--out", "check",
        ]
    )
    out = capsys.readouterr().out
    assert code == 0
    assert "PASS" in out
    payload = json.loads((tmp_path / "check.report.json").read_text())
    assert payload["summary"]["pass"] is True
    assert payload["samples"] == 150
    assert {"with_X", "with_Y"} == set(payload["independence"])
    for block in payload["independence"].values():
        assert block["fraction_full"] >= 0.99
    assert "started" not in payload and "finished" not in payload
    manifest = json.loads((tmp_path / "check.manifest.json").read_text())
    assert manifest["tool"] == "superfact"
    assert manifest["command"] == "verify"
    assert manifest["seed"] == 3
    assert manifest["outputs"] == ["check.report.json"]
    assert manifest["started"] <= manifest["finished"]


def test_verify_report_matches_schema(tmp_path, monkeypatch):
    jsonschema = pytest.importorskip("jsonschema")
    from superfact import REPORT_SCHEMA

    monkeypatch.chdir(tmp_path)
    code = cli.main(
        [
            "verify",
            "--system", "ttw",
            "--gamma", "3/2",
            "--alpha", "1.0",
            "--beta", "2.0",
            "--samples", "120",
            "--seed", "1",
            "--out", "t",
        ]
    )
    assert code == 0
    payload = json.loads((tmp_path / "t.report.json").read_text())
    jsonschema.validate(payload, REPORT_SCHEMA)


def test_verify_invalid_ratio_is_config_error(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    code = cli.main(["verify", "--system", "sphere", "--gamma", "1/3"])
    assert code == 2
    assert "error" in capsys.readouterr().err
    assert not list(tmp_path.iterdir())


def test_verify_missing_system_is_config_error(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    assert cli.main(["verify", "--gamma", "1"]) == 2
    assert "no system selected" in capsys.readouterr().err


def test_verify_identity_failure_exit(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)

    def doomed_suite(spec):
        return (
            IdentitySpec(
                "forced.failure",
                lambda b: np.ones(len(b), dtype=np.complex128),
                lambda b: np.zeros(len(b), dtype=np.complex128),
                TOL_POLY,
            ),
        )

    monkeypatch.setattr("superfact.cli.build_suite", doomed_suite)
    code = cli.main(
        ["verify", "--system", "euclidean", "--gamma", "1", "--samples", "20",
         "--seed", "0", "--out", "bad"]
    )
    assert code == 1
    out = capsys.readouterr().out
    assert "FAIL" in out and "forced.failure" in out
    payload = json.loads((tmp_path / "bad.report.json").read_text())
    assert payload["summary"]["pass"] is False


def test_verify_seed_precedence(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    base = ["verify", "--system", "euclidean", "--gamma", "1", "--samples", "20"]
    monkeypatch.setenv(cli.SEED_ENV_VAR, "5")
    assert cli.main(base + ["--seed", "7", "--out", "a"]) == 0
    assert json.loads((tmp_path / "a.manifest.json").read_text())["seed"] == 7
    assert cli.main(base + ["--out", "b"]) == 0
    assert json.loads((tmp_path / "b.manifest.json").read_text())["seed"] == 5
    monkeypatch.delenv(cli.SEED_ENV_VAR)
    assert cli.main(base + ["--out", "c"]) == 0
    assert json.loads((tmp_path / "c.manifest.json").read_text())["seed"] == 0
    monkeypatch.setenv(cli.SEED_ENV_VAR, "not-a-number")
    assert cli.main(base + ["--out", "d"]) == 2


def test_verify_config_file_with_flag_override(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    cfg = tmp_path / "system.json"
    cfg.write_text(json.dumps({"family": "euclidean", "omega": 2.0, "gamma": "1"}))
    code = cli.main(
        ["verify", "--config", str(cfg), "--gamma", "2", "--samples", "20",
         "--seed", "0", "--out", "cfg"]
    )
    assert code == 0
    manifest = json.loads((tmp_path / "cfg.manifest.json").read_text())
    assert manifest["config"]["gamma"] == {"m": 2, "n": 1}
    assert manifest["config"]["omega"] == 2.0
    assert cli.main(["verify", "--config", "missing.json", "--gamma", "1"]) == 2


def test_verify_reports_are_byte_identical(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    base = [
        "verify", "--system", "sphere", "--gamma", "3/2",
        "--samples", "100", "--seed", "11",
    ]
    assert cli.main(base + ["--out", "r1"]) == 0
    assert cli.main(base + ["--out", "r2"]) == 0
    assert (tmp_path / "r1.report.json").read_bytes() == (
        tmp_path / "r2.report.json"
    ).read_bytes()


# ---------- integrate ----------


def test_integrate_circle_csv(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    code = cli.main(
        [
            "integrate",
            "--system", "euclidean",
            "--gamma", "1",
            "--q0", "1,0",
            "--p0", "0,1",
            "--t-end", f"{2 * TWO_PI}",
            "--closure-eps", "1e-4",
            "--out", "orbit",
        ]
    )
    out = capsys.readouterr().out
    assert code == 0
    assert "closure: closed orbit" in out
    header, rows = _read_csv(tmp_path / "orbit.csv")
    assert header == ["t", "q1", "q2", "p1", "p2", "H", "I2", "X", "Y"]
    assert all(len(r) == len(header) for r in rows)
    t = _column(header, rows, "t")
    assert np.all(np.diff(t) > 0)
    h = _column(header, rows, "H")
    assert np.max(np.abs(h - h[0])) <= 1e-8 * (1 + abs(h[0]))
    report = json.loads((tmp_path / "orbit.report.json").read_text())
    assert report["status"] == "completed"
    assert report["closure"]["closed"] is True
    assert report["closure"]["period"] == pytest.approx(TWO_PI, abs=1e-6)
    assert report["drift"]["H"]["relative_drift"] <= 1e-8
    assert "started" not in report
    manifest = json.loads((tmp_path / "orbit.manifest.json").read_text())
    assert manifest["status"] == "completed"
    assert manifest["outputs"] == ["orbit.csv", "orbit.report.json"]


def test_integrate_external_frame(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    code = cli.main(
        [
            "integrate",
            "--system", "euclidean",
            "--gamma", "2",
            "--q0", "0.5,0",
            "--p0", "1,0",
            "--external",
            "--t-end", "1.0",
            "--out", "ext",
        ]
    )
    assert code == 0
    report = json.loads((tmp_path / "ext.report.json").read_text())
    assert report["initial_internal"] == [1.0, 0.0, 0.5, 0.0]


def test_integrate_external_angle_column(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    code = cli.main(
        [
            "integrate",
            "--system", "ttw",
            "--gamma", "3/2",
            "--alpha", "1.1",
            "--beta", "0.7",
            "--q0", "1.2,0.7",
            "--p0", "0.3,0.4",
            "--t-end", "1.0",
            "--external-angle",
            "--out", "angle",
        ]
    )
    assert code == 0
    header, rows = _read_csv(tmp_path / "angle.csv")
    assert header[-1] == "phi"
    phi = _column(header, rows, "phi")
    q2 = _column(header, rows, "q2")
    np.testing.assert_allclose(phi, q2 / 1.5, rtol=1e-15)


def test_integrate_external_angle_rejected_off_ttw(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    code = cli.main(
        [
            "integrate",
            "--system", "euclidean",
            "--gamma", "1",
            "--q0", "1,0",
            "--p0", "0,1",
            "--t-end", "1.0",
            "--external-angle",
            "--out", "nope",
        ]
    )
    assert code == 2
    assert "ttw" in capsys.readouterr().err


def test_integrate_breach_keeps_partial_csv(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    code = cli.main(
        [
            "integrate",
            "--system", "sphere",
            "--gamma", "1",
            "--q0", "0,0",
            "--p0", "45,0",
            "--t-end", "1.0",
            "--out", "wall",
        ]
    )
    assert code == 3
    assert "integration stopped" in capsys.readouterr().out
    header, rows = _read_csv(tmp_path / "wall.csv")
    assert len(rows) >= 2
    report = json.loads((tmp_path / "wall.report.json").read_text())
    assert report["status"] == "breach"
    assert 0.0 < report["breach"]["time"] < 0.1
    assert len(report["breach"]["state"]) == 4
    manifest = json.loads((tmp_path / "wall.manifest.json").read_text())
    assert manifest["status"] == "breach"
    assert manifest["breach"]["time"] == report["breach"]["time"]


def test_integrate_immediate_breach_header_only_csv(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    code = cli.main(
        [
            "integrate",
            "--system", "sphere",
            "--gamma", "1",
            "--q0", "1.56,0",
            "--p0", "0,0",
            "--t-end", "1.0",
            "--out", "edge",
        ]
    )
    assert code == 3
    header, rows = _read_csv(tmp_path / "edge.csv")
    assert header[0] == "t" and rows == []
    report = json.loads((tmp_path / "edge.report.json").read_text())
    assert report["samples"] == 0
    assert report["breach"]["time"] == 0.0


def test_integrate_step_failure_writes_nothing(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    code = cli.main(
        [
            "integrate",
            "--system", "sphere",
            "--gamma", "1",
            "--q0", "0.3,0.2",
            "--p0", "1.5,-0.8",
            "--t-end", "10.0",
            "--method", "midpoint",
            "--sample-dt", "10.0",
            "--fixed-dt", "10.0",
            "--out", "giant",
        ]
    )
    assert code == 4
    assert "error" in capsys.readouterr().err
    assert not (tmp_path / "giant.csv").exists()
    assert not (tmp_path / "giant.report.json").exists()


def test_integrate_midpoint_completes(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    code = cli.main(
        [
            "integrate",
            "--system", "euclidean",
            "--gamma", "2",
            "--q0", "0,0",
            "--p0", "0.5,1",
            "--t-end", f"{TWO_PI}",
            "--method", "midpoint",
            "--sample-dt", f"{TWO_PI / 50}",
            "--fixed-dt", f"{TWO_PI / 1000}",
            "--out", "mid",
        ]
    )
    assert code == 0
    report = json.loads((tmp_path / "mid.report.json").read_text())
    assert report["method"] == "midpoint"
    assert report["drift"]["H"]["relative_drift"] <= 1e-4


def test_integrate_bad_pair_is_config_error(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    code = cli.main(
        ["integrate", "--system", "euclidean", "--gamma", "1",
         "--q0", "1", "--p0", "0,1", "--out", "x"]
    )
    assert code == 2
    assert "comma-separated" in capsys.readouterr().err


def test_integrate_csv_byte_identical_across_runs(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    base = [
        "integrate", "--system", "ttw", "--gamma", "2",
        "--alpha", "1.1", "--beta", "0.7",
        "--q0", "1.3,0.7", "--p0", "0.25,0.4", "--t-end", "3.0",
    ]
    assert cli.main(base + ["--out", "runa"]) == 0
    assert cli.main(base + ["--out", "runb"]) == 0
    assert (tmp_path / "runa.csv").read_bytes() == (tmp_path / "runb.csv").read_bytes()
    ra = json.loads((tmp_path / "runa.report.json").read_text())
    rb = json.loads((tmp_path / "runb.report.json").read_text())
    assert ra == rb


# ---------- trace ----------


def test_trace_rediscovers_levels(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    from _oracles import spec_for

    spec = spec_for("euclidean", "1")
    seedpt = PhasePoint(0.5, -0.3, 0.4, 0.7)
    h0 = hamiltonian(spec, seedpt)
    i20 = second_integral(spec, seedpt)
    x0 = higher_integral(spec, seedpt).x_real
    code = cli.main(
        [
            "trace",
            "--system", "euclidean",
            "--gamma", "1",
            "--energy", f"{h0!r}",
            "--second", f"{i20!r}",
            "--symmetry", f"X={x0!r}",
            "--t-end", "1.0",
            "--plane", "xy",
            "--out", "lv",
        ]
    )
    out = capsys.readouterr().out
    assert code == 0
    assert "levels matched at internal point" in out
    report = json.loads((tmp_path / "lv.report.json").read_text())
    assert report["levels"] == {"H": h0, "I2": i20, "X": x0}
    assert report["solution"]["level_residual"] <= 1e-9
    found = PhasePoint(*report["solution"]["internal"])
    assert hamiltonian(spec, found) == pytest.approx(h0, rel=1e-8, abs=1e-8)
    assert second_integral(spec, found) == pytest.approx(i20, rel=1e-8, abs=1e-8)
    assert higher_integral(spec, found).x_real == pytest.approx(
        x0, rel=1e-8, abs=1e-8
    )
    header, rows = _read_csv(tmp_path / "lv.csv")
    assert header[-2:] == ["x", "y"]
    assert len(rows) > 0


def test_trace_infeasible_levels(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    code = cli.main(
        [
            "trace",
            "--system", "euclidean",
            "--gamma", "2",
            "--energy", "0.1",
            "--second", "1.0",
            "--symmetry", "Y=0.0",
            "--out", "no",
        ]
    )
    assert code == 5
    assert "no phase point matches" in capsys.readouterr().err
    assert not (tmp_path / "no.csv").exists()


def test_trace_symmetry_flag_validation(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    base = ["trace", "--system", "euclidean", "--gamma", "1",
            "--energy", "1.0", "--second", "0.2"]
    assert cli.main(base + ["--symmetry", "Z=1"]) == 2
    assert cli.main(base + ["--symmetry", "X:1"]) == 2
    assert "X=<value> or Y=<value>" in capsys.readouterr().err
