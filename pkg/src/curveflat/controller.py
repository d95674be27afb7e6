"""Nonlinear tracking of the nominal SIR trajectory.

The ideal law

    beta = psi_i (i_ref - i) - psi_s (s_ref - s) + (s_ref i_ref) / (s i) * beta_ref

makes (s, i) converge exponentially to a reference that solves the SIR
equations, for any psi_s > 0 and psi_i >= 0. The practical law floors the
product ``s * i`` at ``epsilon`` and clips the result to
``[beta_min, beta_max]``.

Note: the convergence argument runs through a PD law in the coordinate
``x = -(s + i) / gamma`` whose proportional gain ``alpha_p = psi_s * gamma``
must exceed ``gamma``, i.e. ``psi_s > 1``. Gains are only validated against
the weaker ``psi_s > 0`` condition.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .policy import FlatteningProblem, optimal_beta
from .sir import DEFAULT_DT, EpidemicState, integrate_feedback, integrate_sir


@dataclass(frozen=True)
class ControllerGains:
    psi_i: float = 50.0
    psi_s: float = 20.0
    epsilon: float = 1e-6
    beta_min: float = 0.055
    beta_max: float = 0.22

    def __post_init__(self):
        if not self.psi_s > 0:
            raise ValueError(f"psi_s must be > 0, got {self.psi_s}")
        if not self.psi_i >= 0:
            raise ValueError(f"psi_i must be >= 0, got {self.psi_i}")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be > 0")
        if not 0 < self.beta_min < self.beta_max:
            raise ValueError(
                f"need 0 < beta_min < beta_max, got [{self.beta_min}, {self.beta_max}]")

    @classmethod
    def from_pd(cls, alpha_p: float, alpha_d: float, gamma: float, **kw) -> "ControllerGains":
        """Gains equivalent to a PD law with gains ``alpha_p``, ``alpha_d`` in x-coordinates."""
        return cls(psi_i=alpha_d - alpha_p / gamma, psi_s=alpha_p / gamma, **kw)


class ReferencePoint(NamedTuple):
    s: float
    i: float
    beta: float


@dataclass(frozen=True)
class ReferenceTrajectory:
    times: np.ndarray
    s_bar: np.ndarray
    i_bar: np.ndarray
    beta_bar: float
    dt: float

    def index(self, t: float) -> int:
        """Most recent sample at or before ``t`` (zero-order hold)."""
        k = int(np.floor(t / self.dt + 1e-9))
        return min(max(k, 0), len(self.times) - 1)

    def at(self, t: float) -> ReferencePoint:
        k = self.index(t)
        return ReferencePoint(float(self.s_bar[k]), float(self.i_bar[k]), self.beta_bar)


def reference_trajectory(i0_bar: float, i_th: float, gamma: float, t_final: float,
                         dt: float = DEFAULT_DT) -> ReferenceTrajectory:
    """Nominal SIR solution under the constant optimal transmission rate."""
    beta_bar = optimal_beta(FlatteningProblem(i0_bar, i_th, gamma))
    return reference_from_beta(i0_bar, beta_bar, gamma, t_final, dt)


def reference_from_beta(i0_bar: float, beta_bar: float, gamma: float, t_final: float,
                        dt: float = DEFAULT_DT) -> ReferenceTrajectory:
    traj = integrate_sir(EpidemicState(1.0 - i0_bar, i0_bar), beta_bar, gamma, t_final, dt)
    return ReferenceTrajectory(traj.times, traj.s, traj.i, float(beta_bar), dt)


def feedback_beta_ideal(x: EpidemicState, ref: ReferencePoint, g: ControllerGains) -> float:
    si = x.s * x.i
    if si == 0:
        raise ZeroDivisionError("ideal law is singular at s*i = 0; use the saturated law")
    return (g.psi_i * (ref.i - x.i) - g.psi_s * (ref.s - x.s)
            + ref.s * ref.i / si * ref.beta)


def feedback_beta_saturated(x: EpidemicState, ref: ReferencePoint, g: ControllerGains) -> float:
    si = max(x.s * x.i, g.epsilon)
    beta = (g.psi_i * (ref.i - x.i) - g.psi_s * (ref.s - x.s)
            + ref.s * ref.i / si * ref.beta)
    return min(max(beta, g.beta_min), g.beta_max)


def pd_feedback_beta(x: EpidemicState, ref: ReferencePoint, gamma: float,
                     alpha_p: float, alpha_d: float) -> float:
    """The same law written as feedback linearisation plus PD in ``x = -(s+i)/gamma``.

    With ``i = x'`` and ``s = -gamma x - x'`` the SIR model reads
    ``x'' = -(gamma x + x') x' beta - gamma x'``; the reference acceleration
    is taken from that equation at the reference point.
    """
    x_pos = -(x.s + x.i) / gamma
    x_vel = x.i
    r_pos = -(ref.s + ref.i) / gamma
    r_vel = ref.i
    r_acc = -(gamma * r_pos + r_vel) * r_vel * ref.beta - gamma * r_vel
    return (-(gamma * r_vel + r_acc) / ((gamma * x_pos + x_vel) * x_vel)
            + alpha_p * (r_pos - x_pos) + alpha_d * (r_vel - x_vel))


@dataclass
class ClosedLoopTrajectory:
    times: np.ndarray
    s: np.ndarray
    i: np.ndarray
    s_bar: np.ndarray
    i_bar: np.ndarray
    beta: np.ndarray

    COLUMNS = ("t", "s", "i", "s_bar", "i_bar", "beta")

    def error_norm(self) -> np.ndarray:
        return np.hypot(self.s - self.s_bar, self.i - self.i_bar)

    def rows(self):
        return zip(*(getattr(self, c).tolist() for c in
                     ("times", "s", "i", "s_bar", "i_bar", "beta")))


def simulate_ode_closed_loop(x0: EpidemicState, ref: ReferenceTrajectory, gains: ControllerGains,
                             gamma: float, t_final: float) -> ClosedLoopTrajectory:
    """SIR plant under the saturated law, re-evaluated every integration step."""
    s_bar, i_bar, beta_bar = ref.s_bar, ref.i_bar, ref.beta_bar
    last = len(s_bar) - 1

    def policy(k, t, s, i):
        k = min(k, last)
        return feedback_beta_saturated(
            EpidemicState(s, i), ReferencePoint(s_bar[k], i_bar[k], beta_bar), gains)

    traj = integrate_feedback(x0, policy, gamma, t_final, ref.dt)
    m = len(traj)
    idx = np.minimum(np.arange(m), last)
    return ClosedLoopTrajectory(traj.times, traj.s, traj.i, s_bar[idx], i_bar[idx], traj.beta)
