"""Family-agnostic numeric profiles, marginals and Jeffreys priors.

This subpackage is the independent oracle for :mod:`proflik.closed_forms`
and the engine behind :mod:`proflik.conjecture`.
"""

from .families import gamma_mean_shape_model, mvn_model, normal_model, regression_model
from .fisher import fisher_info_nuisance, jeffreys_log_prior_numeric
from .model import PD_MATRIX, POSITIVE, UNCONSTRAINED, NuisanceModel
from .montecarlo import Proposal, inverse_gamma_proposal, inverse_wishart_proposal, marginal_mc
from .optimize import maximize_simplex, profile_numeric
from .quadrature import QuadratureResult, QuadratureSpec, integrate_log, marginal_numeric

__all__ = [
    "NuisanceModel", "UNCONSTRAINED", "POSITIVE", "PD_MATRIX",
    "normal_model", "mvn_model", "regression_model", "gamma_mean_shape_model",
    "maximize_simplex", "profile_numeric",
    "QuadratureSpec", "QuadratureResult", "integrate_log", "marginal_numeric",
    "Proposal", "inverse_gamma_proposal", "inverse_wishart_proposal", "marginal_mc",
    "fisher_info_nuisance", "jeffreys_log_prior_numeric",
]
