import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from curveflat.controller import (ControllerGains, ReferencePoint, feedback_beta_ideal,
                                  feedback_beta_saturated, pd_feedback_beta, reference_from_beta,
                                  reference_trajectory, simulate_ode_closed_loop)
from curveflat.sir import EpidemicState


@pytest.fixture(scope="module")
def fig3_reference():
    return reference_trajectory(0.1, 0.12, 0.1, 400.0)


class TestReference:
    def test_peak_at_capacity(self, fig3_reference):
        assert fig3_reference.i_bar.max() == pytest.approx(0.12, abs=1e-3)

    def test_initial_point(self, fig3_reference):
        p = fig3_reference.at(0.0)
        assert (p.s, p.i) == pytest.approx((0.9, 0.1))
        assert p.beta == pytest.approx(0.13945946003772, rel=1e-10)

    def test_non_increasing_from_capacity(self):
        ref = reference_trajectory(0.12, 0.12, 0.1, 100.0)
        assert np.all(np.diff(ref.i_bar) <= 1e-15)

    def test_zero_order_hold(self, fig3_reference):
        assert fig3_reference.index(0.005) == 0
        assert fig3_reference.index(0.01) == 1
        assert fig3_reference.index(1e6) == len(fig3_reference.times) - 1

    def test_from_beta(self):
        ref = reference_from_beta(0.05, 0.0, 0.1, 10.0)
        assert ref.i_bar[-1] == pytest.approx(0.05 * math.exp(-1.0), abs=1e-8)


class TestGains:
    def test_defaults(self):
        g = ControllerGains()
        assert (g.psi_i, g.psi_s, g.beta_max) == (50.0, 20.0, 0.22)

    @pytest.mark.parametrize("kw", [
        {"psi_s": 0.0}, {"psi_s": -1.0}, {"psi_i": -0.1}, {"epsilon": 0.0},
        {"beta_min": 0.3}, {"beta_min": 0.0},
    ])
    def test_rejected(self, kw):
        with pytest.raises(ValueError):
            ControllerGains(**kw)

    def test_from_pd(self):
        g = ControllerGains.from_pd(2.0, 25.0, 0.1)
        assert g.psi_s == pytest.approx(20.0)
        assert g.psi_i == pytest.approx(5.0)


class TestIdealLaw:
    def test_on_trajectory(self):
        ref = ReferencePoint(0.8, 0.12, 0.14)
        assert feedback_beta_ideal(EpidemicState(0.8, 0.12), ref, ControllerGains()) == 0.14

    def test_substitution(self):
        g = ControllerGains(psi_i=1.0, psi_s=0.5)
        beta = feedback_beta_ideal(EpidemicState(0.8, 0.1), ReferencePoint(0.8, 0.12, 0.14), g)
        assert beta == pytest.approx(0.188, abs=1e-12)

    def test_singular(self):
        with pytest.raises(ZeroDivisionError):
            feedback_beta_ideal(EpidemicState(0.9, 0.0), ReferencePoint(0.8, 0.12, 0.14),
                                ControllerGains())


def test_pd_equivalence_random_states():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(10_000):
        gamma = rng.uniform(0.02, 0.5)
        s, i = rng.uniform(0.01, 1.0, 2)
        sb, ib = rng.uniform(0.01, 1.0, 2)
        beta_bar = rng.uniform(0.0, 1.0)
        psi_i, psi_s = rng.uniform(0.0, 50.0), rng.uniform(1e-3, 50.0)
        alpha_p, alpha_d = psi_s * gamma, psi_i + psi_s
        g = ControllerGains.from_pd(alpha_p, alpha_d, gamma)
        x, ref = EpidemicState(s, i), ReferencePoint(sb, ib, beta_bar)
        a = feedback_beta_ideal(x, ref, g)
        b = pd_feedback_beta(x, ref, gamma, alpha_p, alpha_d)
        worst = max(worst, abs(a - b) / max(1.0, abs(a)))
    assert worst <= 1e-9


class TestSaturatedLaw:
    def test_inside_bounds(self):
        ref = ReferencePoint(0.8, 0.12, 0.14)
        assert feedback_beta_saturated(EpidemicState(0.8, 0.12), ref, ControllerGains()) == 0.14

    def test_floor_prevents_blow_up(self):
        g = ControllerGains()
        beta = feedback_beta_saturated(EpidemicState(1e-9, 1e-9), ReferencePoint(0.8, 0.12, 0.14), g)
        assert beta == g.beta_max

    def test_fig3_starts_at_lower_bound(self, fig3_reference):
        g = ControllerGains()
        assert feedback_beta_saturated(EpidemicState(0.86, 0.14), fig3_reference.at(0.0), g) == 0.055

    @given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1), st.floats(0, 1), st.floats(0, 2))
    def test_always_within_bounds(self, s, i, sb, ib, b):
        g = ControllerGains()
        beta = feedback_beta_saturated(EpidemicState(s, i), ReferencePoint(sb, ib, b), g)
        assert g.beta_min <= beta <= g.beta_max


@pytest.fixture(scope="module")
def loop():
    ref = reference_trajectory(0.1, 0.12, 0.1, 200.0)
    return simulate_ode_closed_loop(EpidemicState(0.86, 0.14), ref, ControllerGains(), 0.1, 200.0)


class TestClosedLoop:
    def test_converges(self, loop):
        assert loop.error_norm()[-1] < 1e-3
        assert abs(loop.i[-1] - loop.i_bar[-1]) < 1e-3

    def test_input_starts_at_lower_bound(self, loop):
        assert loop.beta[0] == 0.055
        assert np.all((loop.beta >= 0.055) & (loop.beta <= 0.22))

    def test_rows_shape(self, loop):
        first = next(iter(loop.rows()))
        assert len(first) == len(loop.COLUMNS)
        assert first[:3] == (0.0, 0.86, 0.14)
