import json

import pytest

from curveflat import io
from curveflat.cli import main

SMALL = """\
name: small
horizon: 90
runs: 2
network:
  n_nodes: 1500
epidemic:
  i0_count: 75
"""


@pytest.fixture
def scenario(tmp_path):
    p = tmp_path / "small.yaml"
    p.write_text(SMALL)
    return str(p)


def run(*argv):
    return main([str(a) for a in argv])


class TestOptimalBeta:
    def test_fig3(self, capsys):
        assert run("optimal-beta", "--i0", 0.1, "--ith", 0.12, "--gamma", 0.1) == 0
        out = capsys.readouterr().out
        beta = float(out.splitlines()[0].split("=")[1])
        assert beta == pytest.approx(0.1395, abs=1e-4)
        assert "verified = true" in out

    def test_branch_point(self, capsys):
        assert run("optimal-beta", "--i0", 0.12, "--ith", 0.12, "--gamma", 0.1) == 0
        beta = float(capsys.readouterr().out.splitlines()[0].split("=")[1])
        assert beta == pytest.approx(0.1 / 0.88, rel=1e-9)

    def test_infeasible(self, capsys):
        assert run("optimal-beta", "--i0", 0.2, "--ith", 0.1) != 0
        assert "infeasible" in capsys.readouterr().err


class TestSimulateOde:
    def test_fig3(self, tmp_path, capsys):
        assert run("simulate-ode", "--out", tmp_path) == 0
        cols, rows = io.read_csv(tmp_path / "ode_closed_loop.csv")
        assert cols == ["t", "s", "i", "s_bar", "i_bar", "beta"]
        last = [float(x) for x in rows[-1]]
        assert last[0] == pytest.approx(200.0)
        assert abs(last[2] - last[4]) < 1e-3
        assert float(rows[0][5]) == 0.055
        assert json.loads((tmp_path / "metadata.json").read_text())["package"] == "curveflat"

    def test_zero_horizon_header_only(self, tmp_path):
        p = tmp_path / "z.yaml"
        p.write_text("ode:\n  horizon: 0\n")
        assert run("simulate-ode", "--scenario", p, "--out", tmp_path) == 0
        assert (tmp_path / "ode_closed_loop.csv").read_text() == "t,s,i,s_bar,i_bar,beta\n"

    def test_bad_gains(self, tmp_path, capsys):
        p = tmp_path / "g.yaml"
        p.write_text("ode:\n  psi_s: -1\n")
        assert run("simulate-ode", "--scenario", p, "--out", tmp_path) == 2
        assert "psi_s" in capsys.readouterr().err


def test_seed_is_mandatory(scenario, tmp_path, capsys):
    for cmd in ("simulate-network", "run-scenario", "sweep", "export-network"):
        assert run(cmd, "--scenario", scenario, "--out", tmp_path) == 2
        assert "--seed" in capsys.readouterr().err
    assert not (tmp_path / "daily_counts.csv").exists()


def test_unknown_scenario(tmp_path, capsys):
    assert run("export-network", "--scenario", "nope", "--seed", 1, "--out", tmp_path) == 2


def test_simulate_network(scenario, tmp_path):
    assert run("simulate-network", "--scenario", scenario, "--seed", 3, "--events",
               "--out", tmp_path) == 0
    cols, rows = io.read_csv(tmp_path / "daily_counts.csv")
    assert cols == ["day", "S", "E", "I", "R", "D", "beta_n"]
    assert len(rows) == 91
    assert rows[0][:6] == ["0", "1425", "0", "75", "0", "0"]
    assert all(sum(int(x) for x in r[1:6]) == 1500 for r in rows)
    ecols, events = io.read_csv(tmp_path / "events.csv")
    assert ecols == ["time", "event", "node"]
    times = [float(e[0]) for e in events]
    assert times == sorted(times)


def test_export_network(scenario, tmp_path):
    assert run("export-network", "--scenario", scenario, "--seed", 3, "--out", tmp_path) == 0
    lines = (tmp_path / "network_000.edges").read_text().splitlines()
    pairs = [tuple(map(int, ln.split())) for ln in lines]
    assert all(u < v < 1500 for u, v in pairs)
    assert 2 * len(pairs) / 1500 == pytest.approx(19, abs=1)


def test_run_scenario_outputs(scenario, tmp_path):
    assert run("run-scenario", "--scenario", scenario, "--seed", 4, "--delay", 3, "--update", 7,
               "--out", tmp_path) == 0
    for name in ("ensemble.csv", "ensemble_uncontrolled.csv", "ensemble_lockdown.csv",
                 "metrics.csv", "summary.csv", "scenario.yaml", "metadata.json",
                 "runs/run_000.csv", "runs/run_001.csv"):
        assert (tmp_path / name).is_file(), name
    cols, rows = io.read_csv(tmp_path / "ensemble.csv")
    assert cols[:2] == ["day", "i_mean"] and len(rows) == 91
    cols, rows = io.read_csv(tmp_path / "metrics.csv")
    assert len(rows) == 2 and "death_reduction" in cols
    meta = json.loads((tmp_path / "metadata.json").read_text())
    assert len(meta["controller"]["beta_n_grid"]) == 5
    assert meta["scenario"]["master_seed"] == 4


def test_sweep_cell_count(scenario, tmp_path):
    assert run("sweep", "--scenario", scenario, "--seed", 4, "--runs", 1,
               "--out", tmp_path) == 0
    assert len(list((tmp_path / "cells").glob("*.csv"))) == 18
    cols, rows = io.read_csv(tmp_path / "sweep.csv")
    assert cols == ["delay", "update", "mode", "metric", "mean", "Q1", "Q3"]
    assert len(rows) == 36
    assert {(r[0], r[1], r[2]) for r in rows} == {
        (f"{d:.1f}", str(u), m) for d in (3, 7, 20) for u in (1, 7, 15)
        for m in ("matched", "mismatched")}


def test_csv_round_trip(tmp_path):
    rows = [(1, 0.1, "a"), (2, 1e-300, "b")]
    io.write_csv(tmp_path / "x.csv", ("k", "v", "s"), rows)
    cols, back = io.read_csv(tmp_path / "x.csv")
    assert cols == ["k", "v", "s"]
    assert [(int(k), float(v), s) for k, v, s in back] == rows
    assert b"\r" not in (tmp_path / "x.csv").read_bytes()
