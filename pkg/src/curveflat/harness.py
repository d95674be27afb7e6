"""Closed-loop experiments on the network model.

Each controlled run repeats, every ``update_interval`` days: take a delayed,
noisy daily measurement of (s, i); evaluate the saturated tracking law
against the nominal reference; snap the result onto the quantisation grid;
convert it to a per-link rate with the input map; hold it until the next
update. Baselines (no restrictions, one fixed lockdown) run on the same
network and initial infections as the controlled run with the same index.

Run ``k`` of an ensemble draws from four independent streams derived from
``(master_seed, k)``, so results never depend on scheduling.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .config import ScenarioConfig
from .controller import (ControllerGains, ReferenceTrajectory, feedback_beta_saturated,
                         reference_from_beta, reference_trajectory)
from .maps import MapParams, effective_gamma, input_map, inverse_input_map, output_map
from .network import erdos_renyi
from .rng import py_random, run_streams
from .seird import SeirdParams, advance, init_state
from .sir import DEFAULT_DT, EpidemicState, _rk4

log = logging.getLogger(__name__)

CONTROLLED = "controlled"
UNCONTROLLED = "uncontrolled"
LOCKDOWN = "lockdown"


# --------------------------------------------------------------------------
# Controller-side derived quantities


@dataclass(frozen=True)
class ControlSetup:
    """Everything the controller needs, resolved from a scenario."""

    gamma: float
    gains: ControllerGains
    grid: tuple[float, ...]
    reference: ReferenceTrajectory
    maps: MapParams
    i0_bar: float

    @property
    def beta_min(self) -> float:
        return self.grid[0]

    @property
    def beta_max(self) -> float:
        return self.grid[-1]


def quantization_grid(levels: int, beta_min: float, beta_max: float) -> tuple[float, ...]:
    if levels < 2:
        raise ValueError("need at least two levels")
    if not beta_min < beta_max:
        raise ValueError("beta_min must be below beta_max")
    step = (beta_max - beta_min) / (levels - 1)
    return tuple(beta_min + k * step for k in range(levels - 1)) + (beta_max,)


def quantize_beta(beta: float, levels: int, beta_min: float, beta_max: float) -> float:
    """Nearest of ``levels`` equally spaced values in ``[beta_min, beta_max]``.

    Exact ties go to the lower, more restrictive level.
    """
    grid = quantization_grid(levels, beta_min, beta_max)
    return _snap(beta, grid)


def _snap(beta: float, grid) -> float:
    lo, hi = grid[0], grid[-1]
    if beta <= lo:
        return lo
    if beta >= hi:
        return hi
    step = (hi - lo) / (len(grid) - 1)
    k = math.ceil((beta - lo) / step - 0.5)
    return grid[min(max(k, 0), len(grid) - 1)]


def reference_for(i0_bar: float, i_th: float, gamma: float, horizon: float,
                  dt: float = DEFAULT_DT) -> ReferenceTrajectory:
    """Nominal trajectory; a start above capacity gets the non-increasing one.

    With ``i0_bar > i_th`` no constant rate keeps the curve under capacity;
    the largest rate whose curve never rises, ``gamma / (1 - i0_bar)``, is
    used instead (the capacity constraint with ``i_th`` raised to ``i0_bar``).
    """
    if i0_bar > i_th:
        return reference_from_beta(i0_bar, gamma / (1.0 - i0_bar), gamma, horizon, dt)
    return reference_trajectory(i0_bar, i_th, gamma, horizon, dt)


def control_setup(cfg: ScenarioConfig, mode: str | None = None) -> ControlSetup:
    ep, ctl = cfg.epidemic, cfg.control
    mode = ctl.mode if mode is None else mode
    maps = MapParams(ep.gamma_E, ep.gamma_I, cfg.network.mean_degree)
    gamma = effective_gamma(maps)
    beta_max = inverse_input_map(ep.beta_n, maps)
    beta_min = ctl.beta_min_fraction * beta_max
    grid = quantization_grid(ctl.quantization_levels, beta_min, beta_max)
    i0 = ep.i0_count / cfg.network.n_nodes
    if mode == "matched":
        i0_bar = i0
    elif mode == "mismatched":
        i0_bar = min(ctl.i_th, i0)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    gains = ControllerGains(ctl.psi_i, ctl.psi_s, ctl.epsilon, beta_min, beta_max)
    ref = reference_for(i0_bar, ctl.i_th, gamma, cfg.horizon)
    return ControlSetup(gamma, gains, grid, ref, maps, i0_bar)


# --------------------------------------------------------------------------
# Measurement channel


def measure(history, t: int, delay_mean: float, delay_std: float, noise_std: float,
            rng: np.random.Generator, noise_rng: np.random.Generator | None = None
            ) -> EpidemicState:
    """Delayed, multiplicatively noisy reading of the daily true state.

    ``history[d]`` is the true (s, i) at day ``d``. The delay is a rounded
    normal draw clamped to ``[0, t]``; each component is scaled by an
    independent ``1 + N(0, noise_std)`` factor. The reading is clipped to
    [0, 1] and rescaled if ``s + i > 1``.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    noise_rng = rng if noise_rng is None else noise_rng
    delay = int(math.floor(rng.normal(delay_mean, delay_std) + 0.5))
    delay = min(max(delay, 0), t)
    s, i = history[t - delay]
    eta = noise_rng.normal(0.0, noise_std, size=2)
    s = min(max(s * (1.0 + eta[0]), 0.0), 1.0)
    i = min(max(i * (1.0 + eta[1]), 0.0), 1.0)
    total = s + i
    if total > 1.0:
        s, i = s / total, i / total
    return EpidemicState(s, i)


# --------------------------------------------------------------------------
# Plants


class NetworkPlant:
    """SEIRD on a fresh ER network; input is the SIR-level rate."""

    def __init__(self, cfg: ScenarioConfig, streams, maps: MapParams):
        net = erdos_renyi(cfg.network.n_nodes, cfg.network.edge_probability, streams["network"])
        init_seed, dyn_seed = streams["epidemic"].spawn(2)
        self.n = net.n_nodes
        self.state = init_state(net, cfg.epidemic.i0_count, init_seed)
        self.rng = py_random(dyn_seed)
        self.maps = maps
        ep = cfg.epidemic
        self._params = dict(gamma_E=ep.gamma_E, gamma_I=ep.gamma_I, p_d_low=ep.p_d_low,
                            p_d_high=ep.p_d_high, i_th=cfg.control.i_th)
        self._cache: dict[float, SeirdParams] = {}
        self.day = 0

    def counts(self):
        return tuple(self.state.counts)

    def observe(self) -> EpidemicState:
        return output_map(self.state.counts, self.n)

    def network_rate(self, beta_sir: float) -> float:
        return input_map(beta_sir, self.maps)

    def step_day(self, beta_sir: float):
        p = self._cache.get(beta_sir)
        if p is None:
            p = self._cache[beta_sir] = SeirdParams(self.network_rate(beta_sir), **self._params)
        self.day += 1
        advance(self.state, p, self.rng, float(self.day))


class OdePlant:
    """SIR with the controller's own gamma; reports counts as scaled fractions."""

    def __init__(self, cfg: ScenarioConfig, streams, maps: MapParams, gamma: float,
                 dt: float = DEFAULT_DT):
        self.n = cfg.network.n_nodes
        i0 = cfg.epidemic.i0_count / self.n
        self.s, self.i = 1.0 - i0, i0
        self.gamma = gamma
        self.dt = dt
        self.steps = int(round(1.0 / dt))

    def counts(self):
        n = self.n
        return (self.s * n, 0.0, self.i * n, (1.0 - self.s - self.i) * n, 0.0)

    def observe(self) -> EpidemicState:
        return EpidemicState(self.s, self.i)

    def network_rate(self, beta_sir: float) -> float:
        return beta_sir

    def step_day(self, beta_sir: float):
        s, i = self.s, self.i
        for _ in range(self.steps):
            s, i = _rk4(s, i, beta_sir, self.gamma, self.dt)
        self.s, self.i = s, i


# --------------------------------------------------------------------------
# Single runs


@dataclass
class RunResult:
    kind: str
    run_index: int
    days: np.ndarray
    counts: np.ndarray          # (horizon + 1, 5): S, E, I, R, D
    beta_applied: np.ndarray    # SIR-level rate in force during [d, d+1)
    beta_n: np.ndarray          # the same, after the input map
    s_true: np.ndarray
    i_true: np.ndarray
    s_meas: np.ndarray          # reading the controller is acting on; NaN for baselines
    i_meas: np.ndarray
    i_th: float
    update_days: list[int] = field(default_factory=list)

    COLUMNS = ("day", "S", "E", "I", "R", "D", "beta_applied", "s_meas", "i_meas")

    @property
    def horizon(self) -> int:
        return len(self.days) - 1

    @property
    def final_deaths(self) -> float:
        return float(self.counts[-1, 4])

    @property
    def beta_integral(self) -> float:
        return float(np.sum(self.beta_applied[:-1]))

    @property
    def peak_i(self) -> float:
        return float(np.max(self.i_true))

    @property
    def frac_days_above(self) -> float:
        return float(np.mean(self.i_true > self.i_th))

    def rows(self):
        for d in range(len(self.days)):
            yield (int(self.days[d]), *self.counts[d].tolist(), float(self.beta_applied[d]),
                   float(self.s_meas[d]), float(self.i_meas[d]))


def _make_plant(cfg, streams, setup, plant):
    if plant == "network":
        return NetworkPlant(cfg, streams, setup.maps)
    if plant == "ode":
        return OdePlant(cfg, streams, setup.maps, setup.gamma)
    raise ValueError(f"unknown plant {plant!r}")


def _simulate(cfg: ScenarioConfig, run_index: int, kind: str, setup: ControlSetup,
              plant: str = "network") -> RunResult:
    streams = run_streams(cfg.master_seed, run_index)
    sim = _make_plant(cfg, streams, setup, plant)
    delay_rng = np.random.default_rng(streams["delay"])
    noise_rng = np.random.default_rng(streams["noise"])
    meas = cfg.measurement
    tf = cfg.horizon
    counts = np.zeros((tf + 1, 5), dtype=float if plant == "ode" else np.int64)
    beta = np.zeros(tf + 1)
    s_true, i_true = np.zeros(tf + 1), np.zeros(tf + 1)
    s_meas = np.full(tf + 1, np.nan)
    i_meas = np.full(tf + 1, np.nan)
    history: list[EpidemicState] = []
    updates = []
    current = setup.beta_max
    reading = None
    for d in range(tf + 1):
        counts[d] = sim.counts()
        x = sim.observe()
        history.append(x)
        s_true[d], i_true[d] = x
        if kind == CONTROLLED:
            if d % meas.update_interval == 0 and d < tf:
                reading = measure(history, d, meas.delay_mean, meas.delay_std,
                                  meas.noise_std, delay_rng, noise_rng)
                raw = feedback_beta_saturated(reading, setup.reference.at(d), setup.gains)
                current = _snap(raw, setup.grid)
                updates.append(d)
            s_meas[d], i_meas[d] = reading
        elif kind == LOCKDOWN:
            current = setup.beta_min if d < cfg.lockdown_days else setup.beta_max
        elif kind == UNCONTROLLED:
            current = setup.beta_max
        else:
            raise ValueError(f"unknown run kind {kind!r}")
        beta[d] = current
        if d < tf:
            sim.step_day(current)
    beta_n = np.array([sim.network_rate(b) for b in beta.tolist()])
    return RunResult(kind, run_index, np.arange(tf + 1), counts, beta, beta_n,
                     s_true, i_true, s_meas, i_meas, cfg.control.i_th, updates)


def _require_seed(cfg: ScenarioConfig):
    if cfg.master_seed is None:
        raise ValueError("scenario has no master_seed; pass one explicitly")


def run_closed_loop(cfg: ScenarioConfig, run_index: int, mode: str | None = None,
                    plant: str = "network", setup: ControlSetup | None = None) -> RunResult:
    _require_seed(cfg)
    setup = control_setup(cfg, mode) if setup is None else setup
    return _simulate(cfg, run_index, CONTROLLED, setup, plant)


def run_baseline_lockdown(cfg: ScenarioConfig, run_index: int,
                          setup: ControlSetup | None = None) -> RunResult:
    """Rate at its minimum for the first ``lockdown_days`` days, maximum afterwards."""
    _require_seed(cfg)
    setup = control_setup(cfg) if setup is None else setup
    return _simulate(cfg, run_index, LOCKDOWN, setup)


def run_uncontrolled(cfg: ScenarioConfig, run_index: int,
                     setup: ControlSetup | None = None) -> RunResult:
    _require_seed(cfg)
    setup = control_setup(cfg) if setup is None else setup
    return _simulate(cfg, run_index, UNCONTROLLED, setup)


# --------------------------------------------------------------------------
# Metrics


def metric_beta_reduction(run: RunResult, lockdown_baseline: RunResult) -> float:
    """Relative drop of the integrated SIR-level rate against the lockdown baseline.

    Positive means more distancing than the baseline.
    """
    if run.horizon != lockdown_baseline.horizon:
        raise ValueError("runs must share the horizon")
    base = lockdown_baseline.beta_integral
    return (base - run.beta_integral) / base


def metric_death_reduction(run: RunResult, uncontrolled: RunResult) -> float:
    base = uncontrolled.final_deaths
    if base == 0:
        raise ZeroDivisionError("uncontrolled run has no deaths")
    return (base - run.final_deaths) / base


# --------------------------------------------------------------------------
# Ensembles


@dataclass(frozen=True)
class Quartiles:
    mean: float
    q1: float
    q3: float

    @classmethod
    def of(cls, values) -> "Quartiles":
        v = np.asarray(values, dtype=float)
        q1, q3 = np.percentile(v, [25, 75])
        return cls(float(np.mean(v)), float(q1), float(q3))

    @property
    def iqr(self) -> float:
        return self.q3 - self.q1


@dataclass
class EnsembleSummary:
    days: np.ndarray
    i_mean: np.ndarray
    i_q1: np.ndarray
    i_q3: np.ndarray
    beta_mean: np.ndarray
    beta_q1: np.ndarray
    beta_q3: np.ndarray
    metrics: dict[str, Quartiles]

    COLUMNS = ("day", "i_mean", "i_q1", "i_q3", "beta_mean", "beta_q1", "beta_q3")

    def rows(self):
        cols = [self.days, self.i_mean, self.i_q1, self.i_q3,
                self.beta_mean, self.beta_q1, self.beta_q3]
        for row in zip(*(c.tolist() for c in cols)):
            yield (int(row[0]), *row[1:])


def summarize(runs: list[RunResult], extra: dict[str, list[float]] | None = None) -> EnsembleSummary:
    i = np.vstack([r.i_true for r in runs])
    b = np.vstack([r.beta_applied for r in runs])
    iq = np.percentile(i, [25, 75], axis=0)
    bq = np.percentile(b, [25, 75], axis=0)
    metrics = {
        "deaths": Quartiles.of([r.final_deaths for r in runs]),
        "peak_i": Quartiles.of([r.peak_i for r in runs]),
        "frac_days_above": Quartiles.of([r.frac_days_above for r in runs]),
        "beta_integral": Quartiles.of([r.beta_integral for r in runs]),
    }
    for name, values in (extra or {}).items():
        metrics[name] = Quartiles.of(values)
    return EnsembleSummary(runs[0].days.copy(), i.mean(axis=0), iq[0], iq[1],
                           b.mean(axis=0), bq[0], bq[1], metrics)


def _job(args):
    cfg, run_index, kind, mode, plant = args
    setup = control_setup(cfg, mode)
    return _simulate(cfg, run_index, kind, setup, plant)


def run_many(cfg: ScenarioConfig, kind: str = CONTROLLED, mode: str | None = None,
             plant: str = "network", workers: int = 1) -> list[RunResult]:
    """All ``cfg.runs`` runs of one kind, ordered by run index."""
    _require_seed(cfg)
    jobs = [(cfg, k, kind, mode, plant) for k in range(cfg.runs)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_job, jobs))
    setup = control_setup(cfg, mode)
    return [_simulate(cfg, k, kind, setup, plant) for k in range(cfg.runs)]


@dataclass
class Baselines:
    uncontrolled: list[RunResult]
    lockdown: list[RunResult]


def run_baselines(cfg: ScenarioConfig, workers: int = 1) -> Baselines:
    return Baselines(run_many(cfg, UNCONTROLLED, workers=workers),
                     run_many(cfg, LOCKDOWN, workers=workers))


def reductions(runs: list[RunResult], baselines: Baselines) -> dict[str, list[float]]:
    return {
        "death_reduction": [metric_death_reduction(r, u)
                            for r, u in zip(runs, baselines.uncontrolled)],
        "beta_reduction": [metric_beta_reduction(r, lk)
                           for r, lk in zip(runs, baselines.lockdown)],
    }


@dataclass
class MonteCarloResult:
    summary: EnsembleSummary
    runs: list[RunResult]
    baselines: Baselines | None = None


def run_monte_carlo(cfg: ScenarioConfig, mode: str | None = None, workers: int = 1,
                    baselines: Baselines | None = None, with_baselines: bool = True
                    ) -> MonteCarloResult:
    """Controlled ensemble; with baselines, adds per-run reduction metrics."""
    runs = run_many(cfg, CONTROLLED, mode, workers=workers)
    if baselines is None and with_baselines:
        baselines = run_baselines(cfg, workers)
    extra = reductions(runs, baselines) if baselines is not None else None
    return MonteCarloResult(summarize(runs, extra), runs, baselines)


DELAYS = (3, 7, 20)
UPDATES = (1, 7, 15)


@dataclass(frozen=True)
class SweepCell:
    delay: float
    update: int
    mode: str
    summary: EnsembleSummary


def sweep(cfg: ScenarioConfig, delays=DELAYS, updates=UPDATES, modes=("mismatched", "matched"),
          workers: int = 1, baselines: Baselines | None = None) -> list[SweepCell]:
    """Every (delay, update, mode) combination against shared baselines.

    Baselines do not depend on the swept parameters, so they are simulated
    once and paired with each cell by run index.
    """
    _require_seed(cfg)
    if baselines is None:
        baselines = run_baselines(cfg, workers)
    cells = []
    for mode in modes:
        for delay in delays:
            for update in updates:
                cell_cfg = cfg.replace(measurement__delay_mean=float(delay),
                                       measurement__update_interval=int(update))
                log.info("sweep cell delay=%s update=%s mode=%s", delay, update, mode)
                res = run_monte_carlo(cell_cfg, mode, workers, baselines)
                cells.append(SweepCell(float(delay), int(update), mode, res.summary))
    return cells


SWEEP_METRICS = ("beta_reduction", "death_reduction")


def sweep_rows(cells: list[SweepCell]):
    for c in cells:
        for m in SWEEP_METRICS:
            q = c.summary.metrics[m]
            yield (c.delay, c.update, c.mode, m, q.mean, q.q1, q.q3)
