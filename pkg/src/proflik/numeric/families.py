"""Concrete :class:`NuisanceModel` instances.

These log densities are written out from the distribution formulas and do
not reuse the closed-form module, so the numeric engine stays an
independent check on it.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special

from ..core import RegressionSample, ScalarSample, VectorSample
from .model import PD_MATRIX, POSITIVE, NuisanceModel

LOG_2PI = math.log(2.0 * math.pi)


def _scalar(x):
    return float(np.asarray(x, dtype=float).reshape(-1)[0])


# -- scalar normal: interest mu, nuisance sigma2 ---------------------------


def _normal_logpdf(data: ScalarSample, interest, nuisance):
    mu = _scalar(interest)
    s2 = _scalar(nuisance)
    if not s2 > 0:
        return -math.inf
    r = data.y - mu
    return -0.5 * data.n * (LOG_2PI + math.log(s2)) - 0.5 * float(np.dot(r, r)) / s2


def _normal_fisher(interest, nuisance):
    s2 = _scalar(nuisance)
    return np.array([[0.5 / (s2 * s2)]])


def _normal_sampler(interest, nuisance, n, rng):
    return ScalarSample(_scalar(interest) + math.sqrt(_scalar(nuisance)) * rng.standard_normal(n))


def _normal_init(data: ScalarSample, interest):
    v = float(np.var(data.y))
    return np.array([v if v > 0 else 1.0])


def normal_model() -> NuisanceModel:
    return NuisanceModel(
        name="normal",
        interest_dim=1,
        nuisance_dim=1,
        log_density=_normal_logpdf,
        nuisance_domain=POSITIVE,
        analytic_nuisance_fisher=_normal_fisher,
        sampler=_normal_sampler,
        initial_nuisance=_normal_init,
    )


# -- multivariate normal: interest mu (d), nuisance Sigma (d x d) ----------


def _mvn_logpdf(data: VectorSample, interest, nuisance):
    mu = np.asarray(interest, dtype=float).reshape(-1)
    Sigma = np.atleast_2d(nuisance)
    try:
        L = np.linalg.cholesky(Sigma)
    except np.linalg.LinAlgError:
        return -math.inf
    z = np.linalg.solve(L, (data.rows - mu).T)
    logdet = 2.0 * np.sum(np.log(np.diag(L)))
    n, d = data.rows.shape
    return -0.5 * n * (d * LOG_2PI + logdet) - 0.5 * float(np.sum(z * z))


def duplication_matrix(d: int) -> np.ndarray:
    """D with vec(S) = D @ vech(S), vech in ``np.tril_indices`` order."""
    rows, cols = np.tril_indices(d)
    D = np.zeros((d * d, rows.size))
    for k, (i, j) in enumerate(zip(rows, cols)):
        D[i * d + j, k] = 1.0
        D[j * d + i, k] = 1.0
    return D


def _mvn_fisher(interest, nuisance):
    # per-observation information of vech(Sigma): 0.5 D' (S^-1 kron S^-1) D
    Sinv = np.linalg.inv(np.atleast_2d(nuisance))
    D = duplication_matrix(Sinv.shape[0])
    return 0.5 * D.T @ np.kron(Sinv, Sinv) @ D


def _mvn_sampler(interest, nuisance, n, rng):
    mu = np.asarray(interest, dtype=float).reshape(-1)
    L = np.linalg.cholesky(np.atleast_2d(nuisance))
    return VectorSample(mu + rng.standard_normal((n, mu.size)) @ L.T)


def _mvn_init(data: VectorSample, interest):
    dev = data.rows - np.asarray(interest, dtype=float).reshape(-1)
    S = dev.T @ dev / data.n
    return S + 1e-3 * np.trace(S) / data.d * np.eye(data.d)


def mvn_model(d: int) -> NuisanceModel:
    return NuisanceModel(
        name=f"mvn{d}",
        interest_dim=d,
        nuisance_dim=d * (d + 1) // 2,
        log_density=_mvn_logpdf,
        nuisance_domain=PD_MATRIX,
        analytic_nuisance_fisher=_mvn_fisher,
        sampler=_mvn_sampler,
        initial_nuisance=_mvn_init,
    )


# -- linear regression: interest beta (q), nuisance sigma2 -----------------


def _regression_logpdf(data: RegressionSample, interest, nuisance):
    beta = np.asarray(interest, dtype=float).reshape(-1)
    s2 = _scalar(nuisance)
    if not s2 > 0:
        return -math.inf
    r = data.y - data.X @ beta
    return -0.5 * data.n * (LOG_2PI + math.log(s2)) - 0.5 * float(np.dot(r, r)) / s2


def _regression_init(data: RegressionSample, interest):
    v = float(np.var(data.y))
    return np.array([v if v > 0 else 1.0])


def regression_model(q: int) -> NuisanceModel:
    return NuisanceModel(
        name=f"regression{q}",
        interest_dim=q,
        nuisance_dim=1,
        log_density=_regression_logpdf,
        nuisance_domain=POSITIVE,
        analytic_nuisance_fisher=_normal_fisher,
        initial_nuisance=_regression_init,
    )


# -- gamma: interest mean mu, nuisance shape alpha (rate alpha / mu) -------


def _gamma_logpdf(data: ScalarSample, interest, nuisance):
    mu = _scalar(interest)
    a = _scalar(nuisance)
    if not (mu > 0 and a > 0):
        return -math.inf
    y = data.y
    n = data.n
    return (n * (a * math.log(a / mu) - special.gammaln(a))
            + (a - 1.0) * float(np.sum(np.log(y))) - a * float(np.sum(y)) / mu)


def _gamma_fisher(interest, nuisance):
    a = _scalar(nuisance)
    # trigamma(a) = zeta(2, a)
    return np.array([[special.zeta(2.0, a) - 1.0 / a]])


def _gamma_sampler(interest, nuisance, n, rng):
    mu = _scalar(interest)
    a = _scalar(nuisance)
    return ScalarSample(rng.standard_gamma(a, n) * (mu / a))


def _gamma_init(data: ScalarSample, interest):
    m = float(np.mean(data.y))
    v = float(np.var(data.y))
    return np.array([m * m / v if v > 0 else 1.0])


def gamma_mean_shape_model() -> NuisanceModel:
    return NuisanceModel(
        name="gamma-mean-shape",
        interest_dim=1,
        nuisance_dim=1,
        log_density=_gamma_logpdf,
        nuisance_domain=POSITIVE,
        analytic_nuisance_fisher=_gamma_fisher,
        sampler=_gamma_sampler,
        initial_nuisance=_gamma_init,
    )
