from __future__ import annotations

import csv
import io
import json
import subprocess
import sys

import pytest

from motifscale.cli import main


def run_cli(args, capsys):
    code = main(args)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_optimize_subcommand(capsys):
    code, out, err = run_cli(
        ["optimize", "--motif", "triangle", "--tau", "5/2", "--mode", "sub"],
        capsys)
    assert code == 0
    assert "B 0 = 0" in out
    assert "exponent 9/2-(3/2)*tau = 3/4" in out
    assert "unique true" in out


def test_optimize_rejects_bad_tau(capsys):
    code, out, err = run_cli(
        ["optimize", "--motif", "triangle", "--tau", "7/2", "--mode", "sub"],
        capsys)
    assert code == 2
    assert "tau" in err


def test_atlas_stdout(capsys):
    code, out, _ = run_cli(["atlas", "--k", "3", "--tau", "5/2",
                            "--mode", "ind"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 2
    assert {r["exponent_at_tau"] for r in rows} == {"4/3", "3/4"}


def test_atlas_file_output(tmp_path, capsys):
    out_path = tmp_path / "atlas.csv"
    code, out, _ = run_cli(["atlas", "--k", "4", "--tau", "5/2",
                            "--mode", "sub", "--out", str(out_path)], capsys)
    assert code == 0
    with open(out_path, newline="") as fh:
        assert len(list(csv.DictReader(fh))) == 6


def test_generate_census_pipeline(tmp_path, capsys):
    gpath = tmp_path / "g.txt"
    dpath = tmp_path / "d.txt"
    code, out, _ = run_cli(
        ["generate", "--n", "500", "--tau", "5/2", "--seed", "9",
         "--out", str(gpath), "--degrees-out", str(dpath)], capsys)
    assert code == 0
    assert gpath.is_file() and dpath.is_file()
    assert "edges=" in out

    code, out, _ = run_cli(
        ["census", "--graph", str(gpath), "--motif", "triangle",
         "--mode", "sub"], capsys)
    assert code == 0
    rec = json.loads(out)
    assert rec["mode"] == "sub"
    assert rec["count"] >= 0
    assert rec["labeled_embeddings"] == 6 * rec["count"]

    code, out, _ = run_cli(
        ["census", "--graph", str(gpath), "--motif", "triangle",
         "--mode", "sub", "--window", "0:2:50", "--window", "1:2:50",
         "--window", "2:2:50", "--degrees", str(dpath)], capsys)
    assert code == 0
    wrec = json.loads(out)
    assert wrec["windows"] == [[2.0, 50.0]] * 3
    assert wrec["count"] <= rec["count"]


def test_census_window_defaults_to_unbounded(tmp_path, capsys):
    gpath = tmp_path / "g.txt"
    run_cli(["generate", "--n", "300", "--tau", "5/2", "--seed", "2",
             "--out", str(gpath)], capsys)
    code, plain_out, _ = run_cli(
        ["census", "--graph", str(gpath), "--motif", "path3", "--mode",
         "sub"], capsys)
    code2, win_out, _ = run_cli(
        ["census", "--graph", str(gpath), "--motif", "path3", "--mode",
         "sub", "--window", "1:1:inf"], capsys)
    assert code == code2 == 0
    assert json.loads(win_out)["count"] == json.loads(plain_out)["count"]


def test_census_bad_window_exits_2(tmp_path, capsys):
    gpath = tmp_path / "g.txt"
    run_cli(["generate", "--n", "300", "--tau", "5/2", "--seed", "2",
             "--out", str(gpath)], capsys)
    for bad in ("0:1", "9:1:2", "a:1:2"):
        code, _, err = run_cli(
            ["census", "--graph", str(gpath), "--motif", "triangle",
             "--mode", "sub", "--window", bad], capsys)
        assert code == 2, bad
        assert err


def test_census_ceiling_exits_3(tmp_path, capsys):
    gpath = tmp_path / "g.txt"
    run_cli(["generate", "--n", "2000", "--tau", "5/2", "--seed", "4",
             "--out", str(gpath)], capsys)
    code, _, err = run_cli(
        ["census", "--graph", str(gpath), "--motif", "triangle",
         "--mode", "sub", "--ceiling", "10"], capsys)
    assert code == 3
    assert "ceiling" in err


def test_census_missing_graph_exits_2(tmp_path, capsys):
    code, _, err = run_cli(
        ["census", "--graph", str(tmp_path / "nope.txt"),
         "--motif", "triangle", "--mode", "sub"], capsys)
    assert code == 2


def test_constant_subcommand(capsys):
    code, out, _ = run_cli(
        ["constant", "--motif", "triangle", "--tau", "5/2", "--mode", "sub",
         "--samples", "2000", "--eps", "1/10", "--seed", "5"], capsys)
    assert code == 0
    rec = json.loads(out)
    assert rec["value"] == pytest.approx(4.472494822782968, rel=1e-12)
    assert rec["samples"] == 2000


def test_constant_outside_sqrt_class_exits_2(capsys):
    code, _, err = run_cli(
        ["constant", "--motif", "claw", "--tau", "5/2", "--mode", "sub",
         "--samples", "1000"], capsys)
    assert code == 2
    assert "diverges" in err or "class" in err


def test_motif_file_reference(tmp_path, capsys):
    mpath = tmp_path / "m.txt"
    mpath.write_text("# a 4-cycle\nk=4; edges=0-1,1-2,2-3,3-0\n")
    code, out, _ = run_cli(
        ["optimize", "--motif", f"@{mpath}", "--tau", "5/2", "--mode", "ind"],
        capsys)
    assert code == 0
    assert "6-2*tau" in out


def test_experiment_subcommand(tmp_path, capsys):
    plan = tmp_path / "plan.txt"
    plan.write_text(
        "kind = scaling\ntau = 5/2\nn_grid = 300, 600, 1200\n"
        "replications = 2\nmotifs = triangle\nmode = sub\n"
        f"out = {tmp_path / 'run'}\nseed = 3\n")
    code, out, _ = run_cli(["experiment", "--plan", str(plan)], capsys)
    assert code == 0
    assert "triangle sub: slope" in out
    assert (tmp_path / "run" / "scaling_results.csv").is_file()


def test_experiment_bad_plan_exits_2(tmp_path, capsys):
    plan = tmp_path / "plan.txt"
    plan.write_text("kind = scaling\n")
    code, _, err = run_cli(["experiment", "--plan", str(plan)], capsys)
    assert code == 2
    assert "missing" in err


def test_module_entrypoint_help():
    proc = subprocess.run(
        [sys.executable, "-m", "motifscale", "--help"],
        capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0
    for word in ("atlas", "optimize", "generate", "census", "constant",
                 "experiment"):
        assert word in proc.stdout
