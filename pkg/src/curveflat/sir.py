"""Deterministic SIR dynamics on population fractions.

    ds/dt = -beta * i * s
    di/dt =  beta * i * s - gamma * i

Integration is classical RK4 with a fixed step; the transmission rate is
sampled once at the start of each step and held for the whole step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

DEFAULT_DT = 0.01
STATE_SLACK = 1e-9


class EpidemicState(NamedTuple):
    s: float
    i: float

    def validate(self, slack: float = 0.0) -> "EpidemicState":
        if self.s < -slack or self.i < -slack or self.s + self.i > 1.0 + slack:
            raise ValueError(f"infeasible epidemic state {self}")
        return self


@dataclass(frozen=True)
class SirParams:
    beta: float
    gamma: float

    def __post_init__(self):
        if self.gamma < 0:
            raise ValueError("gamma must be non-negative")


class IntegrationError(RuntimeError):
    """The numerical solution left the unit simplex; the step is too large."""


@dataclass
class Trajectory:
    times: np.ndarray
    s: np.ndarray
    i: np.ndarray
    beta: np.ndarray

    COLUMNS = ("t", "s", "i", "beta")

    def __len__(self):
        return len(self.times)

    def state(self, k: int) -> EpidemicState:
        return EpidemicState(float(self.s[k]), float(self.i[k]))

    def rows(self):
        return zip(self.times.tolist(), self.s.tolist(), self.i.tolist(), self.beta.tolist())


def sir_derivative(x: EpidemicState, p: SirParams) -> tuple[float, float]:
    flow = p.beta * x.i * x.s
    return -flow, flow - p.gamma * x.i


def _rk4(s, i, beta, gamma, dt):
    def f(s, i):
        flow = beta * i * s
        return -flow, flow - gamma * i

    k1s, k1i = f(s, i)
    h = 0.5 * dt
    k2s, k2i = f(s + h * k1s, i + h * k1i)
    k3s, k3i = f(s + h * k2s, i + h * k2i)
    k4s, k4i = f(s + dt * k3s, i + dt * k3i)
    return (s + dt / 6.0 * (k1s + 2.0 * k2s + 2.0 * k3s + k4s),
            i + dt / 6.0 * (k1i + 2.0 * k2i + 2.0 * k3i + k4i))


def n_steps(t_final: float, dt: float) -> int:
    if dt <= 0:
        raise ValueError("dt must be positive")
    if t_final < 0:
        raise ValueError("t_final must be non-negative")
    return int(round(t_final / dt))


def integrate_feedback(x0: EpidemicState, policy: Callable[[int, float, float, float], float],
                       gamma: float, t_final: float, dt: float = DEFAULT_DT) -> Trajectory:
    """RK4 under a state-feedback law ``policy(k, t, s, i) -> beta``.

    ``k`` is the step index, so callers holding sampled signals (a reference
    trajectory on the same grid) can index them directly.
    """
    steps = n_steps(t_final, dt)
    s, i = EpidemicState(*x0).validate(STATE_SLACK)
    ss = np.empty(steps + 1)
    ii = np.empty(steps + 1)
    bb = np.empty(steps + 1)
    lo, hi = -STATE_SLACK, 1.0 + STATE_SLACK
    for k in range(steps):
        ss[k], ii[k] = s, i
        b = policy(k, k * dt, s, i)
        bb[k] = b
        s, i = _rk4(s, i, b, gamma, dt)
        if not (lo <= s <= hi and lo <= i <= hi and s + i <= hi):
            raise IntegrationError(f"state ({s}, {i}) left the simplex at t={(k + 1) * dt}")
    ss[steps], ii[steps] = s, i
    bb[steps] = policy(steps, steps * dt, s, i)
    return Trajectory(np.arange(steps + 1) * dt, ss, ii, bb)


def integrate_sir(x0: EpidemicState, beta_schedule: Callable[[float], float] | float,
                  gamma: float, t_final: float, dt: float = DEFAULT_DT) -> Trajectory:
    """Integrate SIR with ``beta_schedule(t)`` sampled at each step start."""
    if callable(beta_schedule):
        return integrate_feedback(x0, lambda k, t, s, i: beta_schedule(t), gamma, t_final, dt)
    beta = float(beta_schedule)
    return integrate_feedback(x0, lambda k, t, s, i: beta, gamma, t_final, dt)


def peak_infected(x0: EpidemicState, beta: float, gamma: float, dt: float = DEFAULT_DT,
                  t_max: float = 1e5) -> float:
    """Largest sampled ``i`` under constant ``beta``.

    Integration stops once ``i`` is falling with ``s`` below ``gamma/beta``;
    from there on ``i`` can only decrease.
    """
    s, i = EpidemicState(*x0).validate(STATE_SLACK)
    peak = i
    s_peak = gamma / beta if beta > 0 else math.inf
    for _ in range(n_steps(t_max, dt)):
        if s <= s_peak:
            break
        s, i = _rk4(s, i, beta, gamma, dt)
        if i > peak:
            peak = i
    return peak


def infected_of_susceptible(s: float, x0: EpidemicState, p: SirParams) -> float:
    """Infected fraction on the constant-beta orbit through ``x0`` at susceptible level ``s``.

    Uses ``s(0) = 1 - i(0)``, so ``x0.s`` is only used for the range check.
    """
    if s <= 0:
        raise ValueError("s must be positive")
    if p.beta <= 0:
        raise ValueError("beta must be positive")
    return p.gamma / p.beta * math.log(s / (1.0 - x0.i)) - s + 1.0


def peak_susceptible(p: SirParams) -> float:
    """Susceptible fraction where ``di/dt = 0``: ``gamma / beta``.

    If this is at or above ``s(0)`` the epidemic is already declining and the
    peak is at ``t = 0``.
    """
    if p.beta <= 0:
        raise ValueError("beta must be positive")
    return p.gamma / p.beta
