"""Conversions between the network simulator and the controller's SIR world."""

from __future__ import annotations

from dataclasses import dataclass

from .sir import EpidemicState


@dataclass(frozen=True)
class MapParams:
    gamma_E: float
    gamma_I: float
    mean_degree: float

    def __post_init__(self):
        if min(self.gamma_E, self.gamma_I, self.mean_degree) <= 0:
            raise ValueError("gamma_E, gamma_I and mean_degree must be positive")


def output_map(counts, n: int) -> EpidemicState:
    """(S, E, I, R, D) -> (s, i); exposed nodes still count as susceptible."""
    s_, e_, i_, r_, d_ = counts
    if s_ + e_ + i_ + r_ + d_ != n:
        raise ValueError("counts must sum to n")
    return EpidemicState((s_ + e_) / n, i_ / n)


def effective_gamma(m: MapParams) -> float:
    """Rate whose reciprocal is the mean E+I residence time, ``1/gamma_E + 1/gamma_I``.

    The residence time itself is hypoexponential, not exponential; only the
    mean is matched.
    """
    return m.gamma_E * m.gamma_I / (m.gamma_E + m.gamma_I)


def input_map(beta_sir: float, m: MapParams) -> float:
    """SIR transmission rate -> per-link network rate.

    Matches R0 between the models (``beta * (gamma_I + gamma_E) / gamma_E``)
    and divides by the mean degree so that ``beta_n * E[k] * I * S / N``
    equals the SIR infection pressure.
    """
    if beta_sir < 0:
        raise ValueError("beta must be non-negative")
    return beta_sir * (m.gamma_I + m.gamma_E) / (m.gamma_E * m.mean_degree)


def inverse_input_map(beta_n: float, m: MapParams) -> float:
    return beta_n * m.gamma_E * m.mean_degree / (m.gamma_I + m.gamma_E)


def si_links_mean_field(i_count: float, s_count: float, n: int, mean_degree: float) -> float:
    if i_count + s_count > n:
        raise ValueError("i_count + s_count must not exceed n")
    return mean_degree * i_count * s_count / n
