"""Largest constant transmission rate that keeps the SIR peak at capacity."""

from __future__ import annotations

from dataclasses import dataclass

from .lambert import INV_E, Branch, lambert_w
from .sir import DEFAULT_DT, EpidemicState, peak_infected

# Numerical slack on "peak <= i_th" for RK4 round-off.
PEAK_SLACK = 1e-9


class InfeasibleProblem(ValueError):
    pass


@dataclass(frozen=True)
class FlatteningProblem:
    """Initial infected fraction, capacity (as a fraction of N) and recovery rate."""

    i0: float
    i_th: float
    gamma: float

    def __post_init__(self):
        if not self.i0 > 0:
            raise InfeasibleProblem(f"initial infected fraction must be positive, got {self.i0}")
        if not self.i_th < 1:
            raise InfeasibleProblem(f"capacity must be below 1, got i_th={self.i_th}")
        if self.i0 > self.i_th:
            raise InfeasibleProblem(
                f"infeasible: i0={self.i0} already exceeds capacity i_th={self.i_th}")
        if not self.gamma > 0:
            raise InfeasibleProblem("gamma must be positive")

    @property
    def initial_state(self) -> EpidemicState:
        return EpidemicState(1.0 - self.i0, self.i0)


def lambert_argument(prob: FlatteningProblem) -> float:
    return -INV_E * (1.0 - prob.i_th) / (1.0 - prob.i0)


def optimal_beta(prob: FlatteningProblem) -> float:
    """beta* = -gamma / (1 - i_th) * W_-1(-(1/e) (1 - i_th) / (1 - i0)).

    When ``i0 == i_th`` the argument sits on the branch point and the answer
    is exactly ``gamma / (1 - i_th)``.
    """
    scale = -prob.gamma / (1.0 - prob.i_th)
    if prob.i0 == prob.i_th:
        return -scale
    return scale * lambert_w(Branch.MINUS1, lambert_argument(prob))


def verify_optimality(prob: FlatteningProblem, beta: float, eps: float,
                      dt: float = DEFAULT_DT) -> bool:
    """Check by integration that ``beta`` sits on the constraint boundary.

    True iff the peak under ``beta`` lies in ``[i_th - eps, i_th]`` and the
    peak under ``beta * (1 + eps)`` exceeds ``i_th``.
    """
    if beta <= 0 or eps <= 0:
        raise ValueError("beta and eps must be positive")
    x0 = prob.initial_state
    peak = peak_infected(x0, beta, prob.gamma, dt)
    if not prob.i_th - eps <= peak <= prob.i_th + PEAK_SLACK:
        return False
    return peak_infected(x0, beta * (1.0 + eps), prob.gamma, dt) > prob.i_th + PEAK_SLACK


def bisect_optimal_beta(prob: FlatteningProblem, tol: float = 1e-10,
                        dt: float = DEFAULT_DT) -> float:
    """Numerical reference for :func:`optimal_beta`: bisection on the integrated peak."""
    lo = prob.gamma / (1.0 - prob.i0)  # peak at t=0, equals i0 <= i_th
    hi = 2.0 * lo
    while peak_infected(prob.initial_state, hi, prob.gamma, dt) <= prob.i_th:
        lo, hi = hi, 2.0 * hi
    while hi - lo > tol * hi:
        mid = 0.5 * (lo + hi)
        if peak_infected(prob.initial_state, mid, prob.gamma, dt) <= prob.i_th:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)

