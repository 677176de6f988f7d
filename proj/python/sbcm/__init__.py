"""Simulation and maximum-likelihood estimation for the stochastic bounded
confidence model of opinion dynamics.

The heavy lifting lives in the compiled extension ``sbcm._core``; this
package re-exports its functions.
"""

from ._core import (
    analytic_bias,
    analytic_variance,
    bias_bound,
    bias_variance_report,
    curvature_epsilon,
    distances_for,
    estimate_epsilon,
    estimate_joint,
    estimate_mu,
    fisher_information,
    log_likelihood,
    log_sigmoid,
    nll_surface,
    replay,
    rho_sweep,
    score_epsilon,
    sigmoid,
    simulate,
    two_agent_oracle,
    validate_params,
)

__all__ = [
    "analytic_bias",
    "analytic_variance",
    "bias_bound",
    "bias_variance_report",
    "curvature_epsilon",
    "distances_for",
    "estimate_epsilon",
    "estimate_joint",
    "estimate_mu",
    "fisher_information",
    "log_likelihood",
    "log_sigmoid",
    "nll_surface",
    "replay",
    "rho_sweep",
    "score_epsilon",
    "sigmoid",
    "simulate",
    "two_agent_oracle",
    "validate_params",
]

__version__ = "0.1.0"
