"""Command-line front end.

    curveflat optimal-beta --i0 0.1 --ith 0.12 --gamma 0.1
    curveflat simulate-ode --scenario codogno --out out/
    curveflat simulate-network --scenario codogno --seed 1 --out out/
    curveflat run-scenario --scenario codogno --seed 1 --runs 100 --delay 3 --update 7 --out out/
    curveflat sweep --scenario codogno --seed 1 --runs 100 --out out/
    curveflat export-network --scenario codogno --seed 1 --out out/

Every stochastic subcommand requires ``--seed``; nothing is seeded from the
clock.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import io
from .config import ScenarioConfig, ScenarioError, load_scenario
from .controller import ControllerGains, reference_trajectory, simulate_ode_closed_loop
from .maps import input_map
from .harness import (ControlSetup, RunResult, control_setup, reductions, run_baselines,
                      run_monte_carlo, summarize, sweep, sweep_rows)
from .network import erdos_renyi
from .policy import (FlatteningProblem, InfeasibleProblem, lambert_argument, optimal_beta,
                     verify_optimality)
from .rng import run_streams
from .seird import DailyCounts, SeirdParams, run_seird
from .sir import EpidemicState

log = logging.getLogger("curveflat")


class UsageError(Exception):
    pass


def _seed(args) -> int:
    if args.seed is None:
        raise UsageError("--seed is required (runs are never seeded from the clock)")
    return args.seed


def _scenario(args, seeded: bool = True) -> ScenarioConfig:
    cfg = load_scenario(args.scenario)
    changes = {}
    if seeded:
        changes["master_seed"] = _seed(args)
    if getattr(args, "runs", None) is not None:
        changes["runs"] = args.runs
    if getattr(args, "delay", None) is not None:
        changes["measurement__delay_mean"] = args.delay
    if getattr(args, "update", None) is not None:
        changes["measurement__update_interval"] = args.update
    if getattr(args, "mode", None) is not None:
        changes["control__mode"] = args.mode
    return cfg.replace(**changes) if changes else cfg


def _setup_metadata(setup: ControlSetup) -> dict:
    g = setup.gains
    return {
        "controller": {
            "gamma": setup.gamma,
            "psi_i": g.psi_i,
            "psi_s": g.psi_s,
            "epsilon": g.epsilon,
            "beta_min": g.beta_min,
            "beta_max": g.beta_max,
            "beta_grid": list(setup.grid),
            "beta_n_grid": [input_map(b, setup.maps) for b in setup.grid],
            "reference_i0": setup.i0_bar,
            "reference_beta": setup.reference.beta_bar,
        }
    }


# --------------------------------------------------------------------------


def cmd_optimal_beta(args) -> int:
    try:
        prob = FlatteningProblem(args.i0, args.ith, args.gamma)
    except InfeasibleProblem as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    beta = optimal_beta(prob)
    ok = verify_optimality(prob, beta, args.eps)
    print(f"beta = {beta:.10g}")
    print(f"lambert_argument = {lambert_argument(prob):.10g}")
    print(f"R0 = {beta / prob.gamma:.10g}")
    print(f"verified = {str(ok).lower()}")
    return 0


def cmd_simulate_ode(args) -> int:
    cfg = _scenario(args, seeded=False)
    o = cfg.ode
    gains = ControllerGains(o.psi_i, o.psi_s, o.epsilon, o.beta_min, o.beta_max)
    out = Path(args.out)
    path = out / "ode_closed_loop.csv"
    cols = ("t", "s", "i", "s_bar", "i_bar", "beta")
    if o.horizon == 0:
        io.write_csv(path, cols, [])
    else:
        ref = reference_trajectory(o.i0_bar, o.i_th, o.gamma, o.horizon, o.dt)
        traj = simulate_ode_closed_loop(EpidemicState(1.0 - o.i0, o.i0), ref, gains,
                                        o.gamma, o.horizon)
        stride = max(1, int(round(args.every / o.dt)))
        rows = list(traj.rows())
        keep = rows[::stride]
        if (len(rows) - 1) % stride:
            keep.append(rows[-1])
        io.write_csv(path, cols, keep)
        e = traj.error_norm()
        print(f"reference beta = {ref.beta_bar:.10g}")
        print(f"final |i - i_bar| = {abs(traj.i[-1] - traj.i_bar[-1]):.3e}")
        print(f"final tracking error = {e[-1]:.3e}")
    io.write_metadata(out / "metadata.json", cfg, _argv(args))
    print(f"wrote {path}")
    return 0


def cmd_simulate_network(args) -> int:
    cfg = _scenario(args)
    streams = run_streams(cfg.master_seed, args.run_index)
    net = erdos_renyi(cfg.network.n_nodes, cfg.network.edge_probability, streams["network"])
    ep = cfg.epidemic
    beta_n = ep.beta_n if args.beta_n is None else args.beta_n
    params = SeirdParams(beta_n, ep.gamma_E, ep.gamma_I, ep.p_d_low, ep.p_d_high, cfg.control.i_th)
    events, daily = run_seird(net, params, beta_n, cfg.horizon, streams["epidemic"],
                              i0_count=ep.i0_count, record_events=args.events)
    out = Path(args.out)
    io.write_csv(out / "daily_counts.csv", DailyCounts.COLUMNS, daily.rows())
    if args.events:
        io.write_csv(out / "events.csv", ("time", "event", "node"), events)
    io.write_metadata(out / "metadata.json", cfg, _argv(args),
                      {"run_index": args.run_index, "beta_n": beta_n,
                       "n_edges": net.n_edges, "mean_degree": 2.0 * net.n_edges / net.n_nodes})
    print(f"final counts S,E,I,R,D = {daily.counts[-1].tolist()}")
    return 0


def _metric_rows(runs, red):
    for k, r in enumerate(runs):
        yield (r.run_index, r.final_deaths, r.peak_i, r.frac_days_above, r.beta_integral,
               red["death_reduction"][k], red["beta_reduction"][k])


def cmd_run_scenario(args) -> int:
    cfg = _scenario(args)
    out = Path(args.out)
    setup = control_setup(cfg)
    log.info("running %d controlled runs + baselines", cfg.runs)
    res = run_monte_carlo(cfg, workers=args.workers)
    bl = res.baselines
    for r in res.runs:
        io.write_csv(out / "runs" / f"run_{r.run_index:03d}.csv", RunResult.COLUMNS, r.rows())
    io.write_csv(out / "ensemble.csv", res.summary.COLUMNS, res.summary.rows())
    io.write_csv(out / "ensemble_uncontrolled.csv", res.summary.COLUMNS,
                 summarize(bl.uncontrolled).rows())
    io.write_csv(out / "ensemble_lockdown.csv", res.summary.COLUMNS, summarize(bl.lockdown).rows())
    red = reductions(res.runs, bl)
    io.write_csv(out / "metrics.csv", io.METRIC_COLUMNS, _metric_rows(res.runs, red))
    summary_rows = [(name, q.mean, q.q1, q.q3) for name, q in res.summary.metrics.items()]
    io.write_csv(out / "summary.csv", ("metric", "mean", "Q1", "Q3"), summary_rows)
    io.write_scenario(out / "scenario.yaml", cfg)
    io.write_metadata(out / "metadata.json", cfg, _argv(args), _setup_metadata(setup))
    for name, mean, q1, q3 in summary_rows:
        print(f"{name:16s} mean={mean:.4g} Q1={q1:.4g} Q3={q3:.4g}")
    return 0


def cmd_sweep(args) -> int:
    cfg = _scenario(args)
    out = Path(args.out)
    delays = args.delays or [3.0, 7.0, 20.0]
    updates = args.updates or [1, 7, 15]
    modes = args.modes or ["mismatched", "matched"]
    bl = run_baselines(cfg, args.workers)
    cells = sweep(cfg, delays, updates, modes, workers=args.workers, baselines=bl)
    for c in cells:
        name = f"ensemble_{c.mode}_d{c.delay:g}_u{c.update}.csv"
        io.write_csv(out / "cells" / name, c.summary.COLUMNS, c.summary.rows())
    io.write_csv(out / "sweep.csv", io.SWEEP_COLUMNS, sweep_rows(cells))
    io.write_scenario(out / "scenario.yaml", cfg)
    meta = {m: _setup_metadata(control_setup(cfg, m)) for m in modes}
    io.write_metadata(out / "metadata.json", cfg, _argv(args),
                      {"delays": delays, "updates": updates, "modes": modes, "setups": meta})
    for row in sweep_rows(cells):
        print("delay={} update={} mode={} {}: mean={:.3f} Q1={:.3f} Q3={:.3f}".format(*row))
    return 0


def cmd_export_network(args) -> int:
    cfg = _scenario(args)
    streams = run_streams(cfg.master_seed, args.run_index)
    net = erdos_renyi(cfg.network.n_nodes, cfg.network.edge_probability, streams["network"])
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"network_{args.run_index:03d}.edges"
    net.write_edge_list(path)
    io.write_metadata(out / "metadata.json", cfg, _argv(args),
                      {"run_index": args.run_index, "n_edges": net.n_edges})
    print(f"wrote {path} ({net.n_edges} edges, mean degree {2.0 * net.n_edges / net.n_nodes:.4f})")
    return 0


# --------------------------------------------------------------------------


def _argv(args) -> list[str]:
    return list(getattr(args, "_argv", []))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="curveflat", description=__doc__.split("\n\n")[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, seeded=True, mc=False):
        sp.add_argument("--scenario", default="codogno",
                        help="scenario YAML file, or the name of a bundled one")
        sp.add_argument("--out", default="out", help="output directory")
        if seeded:
            sp.add_argument("--seed", type=int, help="master seed (required)")
        if mc:
            sp.add_argument("--runs", type=int)
            sp.add_argument("--mode", choices=("matched", "mismatched"))
            sp.add_argument("--workers", type=int, default=1,
                            help="worker processes; outputs do not depend on it")

    sp = sub.add_parser("optimal-beta", help="closed-form optimal constant beta")
    sp.add_argument("--i0", type=float, required=True)
    sp.add_argument("--ith", type=float, required=True)
    sp.add_argument("--gamma", type=float, default=0.1)
    sp.add_argument("--eps", type=float, default=1e-3, help="verification tolerance")
    sp.set_defaults(func=cmd_optimal_beta)

    sp = sub.add_parser("simulate-ode", help="closed-loop SIR trajectory (the `ode` section)")
    common(sp, seeded=False)
    sp.add_argument("--every", type=float, default=0.1, help="output spacing in days")
    sp.set_defaults(func=cmd_simulate_ode)

    sp = sub.add_parser("simulate-network", help="one SEIRD run at constant beta_n")
    common(sp)
    sp.add_argument("--run-index", type=int, default=0)
    sp.add_argument("--beta-n", type=float)
    sp.add_argument("--events", action="store_true", help="also write the event log")
    sp.set_defaults(func=cmd_simulate_network)

    sp = sub.add_parser("run-scenario", help="controlled Monte Carlo ensemble plus baselines")
    common(sp, mc=True)
    sp.add_argument("--delay", type=float)
    sp.add_argument("--update", type=int)
    sp.set_defaults(func=cmd_run_scenario)

    sp = sub.add_parser("sweep", help="delay x update x mode grid")
    common(sp, mc=True)
    sp.add_argument("--delay", dest="delays", type=float, action="append")
    sp.add_argument("--update", dest="updates", type=int, action="append")
    sp.add_argument("--modes", nargs="+", choices=("matched", "mismatched"))
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("export-network", help="write one network realisation as an edge list")
    common(sp)
    sp.add_argument("--run-index", type=int, default=0)
    sp.set_defaults(func=cmd_export_network)
    return p


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    args._argv = argv
    if args.command == "sweep":
        # --mode narrows a sweep to one mode instead of overriding the scenario.
        if args.mode is not None and args.modes is None:
            args.modes = [args.mode]
        args.mode = None
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, ScenarioError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

