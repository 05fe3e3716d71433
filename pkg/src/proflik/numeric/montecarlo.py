"""Importance-sampling estimates of marginal likelihoods."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import stats
from scipy.special import logsumexp

from ..errors import EffectiveSampleSizeTooLow, InvalidInput
from ..rng import stream
from .model import NuisanceModel

MIN_DRAWS = 1000
MIN_ESS = 50.0


@dataclass(frozen=True)
class Proposal:
    """An importance proposal over natural nuisance points.

    ``draw(rng, size)`` returns an array whose leading axis indexes draws;
    ``logpdf(draws)`` evaluates the proposal density on that array.
    """

    draw: Callable
    logpdf: Callable


def inverse_wishart_proposal(df: float, scale) -> Proposal:
    scale = np.atleast_2d(np.asarray(scale, dtype=float))
    dist = stats.invwishart(df=df, scale=scale)
    d = scale.shape[0]

    def draw(rng, size):
        x = dist.rvs(size=size, random_state=rng)
        return np.asarray(x).reshape(size, d, d)

    def logpdf(x):
        x = np.asarray(x).reshape(-1, d, d)
        if d == 1:
            return np.atleast_1d(dist.logpdf(x[:, 0, 0]))
        return np.atleast_1d(dist.logpdf(np.moveaxis(x, 0, -1)))

    return Proposal(draw, logpdf)


def inverse_gamma_proposal(shape: float, scale: float) -> Proposal:
    dist = stats.invgamma(shape, scale=scale)

    def draw(rng, size):
        # reciprocal of an exact gamma variate
        return (scale / rng.standard_gamma(shape, size)).reshape(size, 1)

    def logpdf(x):
        return dist.logpdf(np.asarray(x).reshape(-1))

    return Proposal(draw, logpdf)


def marginal_mc(model: NuisanceModel, data, interest, log_prior, proposal: Proposal,
                draws: int, seed: int):
    """Importance-sampling estimate of log integral(density x prior).

    Returns
    -------
    log_value : float
        log of the mean importance weight.
    std_error : float
        Delta-method standard error of ``log_value``:
        ``sd(w) / (sqrt(N) * mean(w))``.
    """
    draws = int(draws)
    if draws < MIN_DRAWS:
        raise InvalidInput(f"need at least {MIN_DRAWS} draws, got {draws}")
    rng = stream(seed)
    xs = proposal.draw(rng, draws)
    log_q = np.asarray(proposal.logpdf(xs), dtype=float)
    log_w = np.empty(draws)
    with np.errstate(all="ignore"):
        for i, x in enumerate(xs):
            log_w[i] = model.log_density(data, interest, x) + log_prior(x) - log_q[i]
    log_w[~np.isfinite(log_w)] = -np.inf
    log_sum = logsumexp(log_w)
    if not math.isfinite(log_sum):
        raise EffectiveSampleSizeTooLow("all importance weights vanish", ess=0.0)
    w = np.exp(log_w - log_w.max())
    ess = w.sum() ** 2 / np.sum(w * w)
    if ess < MIN_ESS:
        raise EffectiveSampleSizeTooLow(f"effective sample size {ess:.1f} < {MIN_ESS}", ess=ess)
    log_value = float(log_sum - math.log(draws))
    se = float(np.std(w, ddof=1) / (math.sqrt(draws) * np.mean(w)))
    return log_value, se
