"""Expected Fisher information of the nuisance block and numeric Jeffreys priors."""

from __future__ import annotations

import math

import numpy as np

from ..errors import InvalidInput, NoSamplerAvailable, NonFiniteHessian, NotPositiveDefinite
from ..rng import stream
from .model import NuisanceModel
from .optimize import fd_hessian


def fisher_info_nuisance(model: NuisanceModel, interest, nuisance, method="auto",
                         seed=None, reps=100_000):
    """Per-observation expected information of the nuisance at fixed interest.

    Coordinates are the flat natural ones: the variance itself, or the lower
    triangle of a covariance matrix.  ``method="analytic"`` uses the model's
    hook; ``"monte-carlo"`` averages the negative finite-difference Hessian
    of the log density over ``reps`` simulated single-observation datasets
    (evaluated as one batch, since log densities of independent observations
    add); ``"auto"`` prefers the analytic hook.
    """
    if method == "auto":
        method = "analytic" if model.analytic_nuisance_fisher is not None else "monte-carlo"
    flat = model.pack(nuisance)
    model.to_unconstrained(nuisance)  # domain check
    if method == "analytic":
        if model.analytic_nuisance_fisher is None:
            raise InvalidInput(f"{model.name} has no analytic Fisher information")
        info = np.atleast_2d(np.asarray(
            model.analytic_nuisance_fisher(interest, model.unpack(flat)), dtype=float))
    elif method == "monte-carlo":
        if model.sampler is None:
            raise NoSamplerAvailable(f"{model.name} does not expose a data sampler")
        if seed is None:
            raise InvalidInput("Monte Carlo Fisher information needs an explicit seed")
        reps = int(reps)
        if reps < 1:
            raise InvalidInput("reps must be positive")
        data = model.sampler(interest, model.unpack(flat), reps, stream(seed))

        def f(x):
            with np.errstate(all="ignore"):
                return float(model.log_density(data, interest, model.unpack(x)))

        info = -fd_hessian(f, flat) / reps
    else:
        raise InvalidInput(f"unknown method {method!r}")
    if info.shape != (flat.size, flat.size) or not np.all(np.isfinite(info)):
        raise NonFiniteHessian(f"{model.name}: information matrix is not finite")
    return 0.5 * (info + info.T)


def jeffreys_log_prior_numeric(model: NuisanceModel, interest, nuisance, method="auto",
                               seed=None, reps=100_000) -> float:
    """0.5 * log det of the nuisance information (density in natural coordinates)."""
    info = fisher_info_nuisance(model, interest, nuisance, method, seed, reps)
    if info.shape == (1, 1):
        if not info[0, 0] > 0:
            raise NotPositiveDefinite("nuisance Fisher information is not positive")
        return 0.5 * math.log(info[0, 0])
    try:
        L = np.linalg.cholesky(info)
    except np.linalg.LinAlgError:
        raise NotPositiveDefinite("nuisance Fisher information is not positive definite") from None
    return math.fsum(np.log(np.diag(L)))
