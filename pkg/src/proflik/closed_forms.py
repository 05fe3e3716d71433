"""Closed-form profile and Jeffreys-marginal log likelihoods for normal models.

Conventions
-----------
``log_profile_*`` returns the exact log of the supremum over the nuisance of
the full normal density, (2 pi) constants included.  ``log_marginal_*``
returns the exact log of the integral of that density against the Jeffreys
kernel, with the kernel's proportionality constant fixed at one:
``p(sigma2) = 1 / sigma2`` and ``p(Sigma) = |Sigma|^{-(d+1)/2}``.

In all three models the profile and marginal differ by a constant that does
not depend on the interest parameter, so anchored curves coincide.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special, stats

from .core import RegressionSample, ScalarSample, VectorSample, rss, scatter_matrix, sum_sq_dev
from .errors import (
    DegenerateSample,
    InvalidInput,
    NonpositiveVariance,
    NotPositiveDefinite,
    SingularScatter,
    TooFewObservations,
)

LOG_2PI = math.log(2.0 * math.pi)


def chol_logdet(A: np.ndarray) -> float:
    """log|A| via Cholesky; raises ``LinAlgError`` if A is not positive definite."""
    L = np.linalg.cholesky(A)
    return 2.0 * math.fsum(np.log(np.diag(L)))


def _check_n(n, minimum):
    if n < minimum:
        raise TooFewObservations(f"need n >= {minimum}, got n={n}")


def _positive_ss(value, what):
    if not value > 0.0:
        raise DegenerateSample(f"{what} is zero; the supremum over the variance is infinite")
    return value


# -- scalar normal ---------------------------------------------------------


def profile_sigma2_hat(sample: ScalarSample, mu: float) -> float:
    """Maximum likelihood variance at fixed mean, S(mu) / n."""
    return sum_sq_dev(sample, mu) / sample.n


def log_profile_normal(sample: ScalarSample, mu: float) -> float:
    n = sample.n
    _check_n(n, 2)
    S = _positive_ss(sum_sq_dev(sample, mu), "S(mu)")
    return -0.5 * n * (LOG_2PI + 1.0 + math.log(S / n))


def log_marginal_normal_jeffreys(sample: ScalarSample, mu: float) -> float:
    """log of the integral of p(y | mu, sigma2) / sigma2 over sigma2 > 0.

    The integrand is an Inverse-Gamma kernel with shape n/2 and scale S(mu)/2.
    """
    n = sample.n
    _check_n(n, 2)
    S = _positive_ss(sum_sq_dev(sample, mu), "S(mu)")
    return -0.5 * n * LOG_2PI + math.lgamma(0.5 * n) - 0.5 * n * math.log(0.5 * S)


def normal_offset(n: int) -> float:
    """The mu-free gap log_marginal - log_profile for a scalar sample of size n."""
    return math.lgamma(0.5 * n) + 0.5 * n * math.log(2.0) + 0.5 * n - 0.5 * n * math.log(n)


def log_jeffreys_prior_variance(sigma2: float) -> float:
    sigma2 = float(sigma2)
    if not sigma2 > 0.0:
        raise NonpositiveVariance(f"sigma2 must be positive, got {sigma2}")
    return -math.log(sigma2)


# -- multivariate normal ---------------------------------------------------


def _mvn_logdet_scatter(sample: VectorSample, mu) -> float:
    n, d = sample.n, sample.d
    if n <= d:
        raise TooFewObservations(f"need n >= d+1 = {d + 1}, got n={n}")
    A = scatter_matrix(sample, mu)
    try:
        return chol_logdet(A)
    except np.linalg.LinAlgError:
        raise SingularScatter("scatter matrix A(mu) is not positive definite") from None


def log_profile_mvn(sample: VectorSample, mu) -> float:
    """Profile over Sigma; the supremum sits at Sigma_hat(mu) = A(mu) / n."""
    n, d = sample.n, sample.d
    logdet_A = _mvn_logdet_scatter(sample, mu)
    return -0.5 * n * d * (LOG_2PI + 1.0) - 0.5 * n * (logdet_A - d * math.log(n))


def log_marginal_mvn_jeffreys(sample: VectorSample, mu) -> float:
    """Inverse-Wishart normalisation with nu = n, Psi = A(mu)."""
    n, d = sample.n, sample.d
    logdet_A = _mvn_logdet_scatter(sample, mu)
    return (-0.5 * n * d * math.log(math.pi) + special.multigammaln(0.5 * n, d)
            - 0.5 * n * logdet_A)


def log_jeffreys_prior_cov(Sigma) -> float:
    Sigma = np.atleast_2d(np.asarray(Sigma, dtype=float))
    d = Sigma.shape[0]
    if Sigma.shape != (d, d):
        raise InvalidInput("Sigma must be square")
    try:
        logdet = chol_logdet(0.5 * (Sigma + Sigma.T))
    except np.linalg.LinAlgError:
        raise NotPositiveDefinite("Sigma is not positive definite") from None
    return -0.5 * (d + 1) * logdet


# -- linear regression -----------------------------------------------------


def log_profile_regression(sample: RegressionSample, beta) -> float:
    n = sample.n
    _check_n(n, 2)
    R = _positive_ss(rss(sample, beta), "RSS(beta)")
    return -0.5 * n * (LOG_2PI + 1.0 + math.log(R / n))


def log_marginal_regression_jeffreys(sample: RegressionSample, beta) -> float:
    n = sample.n
    _check_n(n, 2)
    R = _positive_ss(rss(sample, beta), "RSS(beta)")
    return -0.5 * n * LOG_2PI + math.lgamma(0.5 * n) - 0.5 * n * math.log(0.5 * R)


# -- flat-prior posterior ----------------------------------------------------


@dataclass(frozen=True)
class StudentTParams:
    """Location-scale Student-t; thin wrapper over ``scipy.stats.t``."""

    df: float
    loc: float
    scale: float

    def __post_init__(self):
        if not (self.df > 0 and self.scale > 0):
            raise InvalidInput("StudentTParams needs df > 0 and scale > 0")

    @property
    def dist(self):
        return stats.t(self.df, loc=self.loc, scale=self.scale)

    def pdf(self, x):
        return self.dist.pdf(x)

    def logpdf(self, x):
        return self.dist.logpdf(x)

    def cdf(self, x):
        return self.dist.cdf(x)


def flat_prior_posterior_t(sample: ScalarSample) -> StudentTParams:
    """Posterior of mu under p(mu) = 1 times the profile likelihood.

    Substituting S(mu) = (n-1) s^2 + n (mu - ybar)^2 into S(mu)^{-n/2} gives a
    t kernel with n-1 degrees of freedom, location ybar and scale s/sqrt(n).
    """
    n = sample.n
    _check_n(n, 3)
    ybar = sample.mean
    ss = sum_sq_dev(sample, ybar)
    if not ss > 0.0:
        raise DegenerateSample("sample variance is zero")
    s = math.sqrt(ss / (n - 1))
    return StudentTParams(df=float(n - 1), loc=ybar, scale=s / math.sqrt(n))
