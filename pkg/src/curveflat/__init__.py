"""Curve-flattening epidemic control: closed-form optimal distancing, nonlinear
tracking, and validation on stochastic SEIRD network outbreaks."""

__version__ = "0.1.0"

from .controller import (ControllerGains, ReferenceTrajectory, feedback_beta_ideal,
                         feedback_beta_saturated, reference_trajectory)
from .lambert import Branch, lambert_w
from .maps import MapParams, effective_gamma, input_map, output_map
from .network import Network, erdos_renyi, mean_degree
from .policy import FlatteningProblem, optimal_beta, verify_optimality
from .sir import EpidemicState, SirParams, integrate_sir

__all__ = [
    "Branch", "ControllerGains", "EpidemicState", "FlatteningProblem", "MapParams",
    "Network", "ReferenceTrajectory", "SirParams", "effective_gamma", "erdos_renyi",
    "feedback_beta_ideal", "feedback_beta_saturated", "input_map", "integrate_sir",
    "lambert_w", "mean_degree", "optimal_beta", "output_map", "reference_trajectory",
    "verify_optimality",
]
