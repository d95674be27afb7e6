import time

import pytest

from curveflat.config import ScenarioConfig, load_scenario
from curveflat.harness import run_baselines, run_monte_carlo

MASTER_SEED = 2020

ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def small_cfg():
    """Codogno rates on a 2000-node network; seconds per ensemble instead of minutes."""
    return ScenarioConfig(master_seed=5, runs=3, horizon=120).replace(
        network__n_nodes=2000, epidemic__i0_count=100)


def record(criterion: int, ok: bool, detail: str) -> None:
    ACCEPTANCE[criterion] = (ok, detail)


@pytest.fixture
def acceptance():
    return record


@pytest.fixture(scope="session")
def headline():
    """Baselines plus delay-3 and delay-20 controlled ensembles (update 7, 100 runs)."""
    cfg = load_scenario("codogno").replace(master_seed=MASTER_SEED)
    assert cfg.runs == 100 and cfg.measurement.update_interval == 7
    t0 = time.perf_counter()
    base = run_baselines(cfg)
    cells = {d: run_monte_carlo(cfg.replace(measurement__delay_mean=float(d)), baselines=base)
             for d in (3, 20)}
    return cfg, base, cells, time.perf_counter() - t0


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")
