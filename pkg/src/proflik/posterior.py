"""Profile posteriors for the scalar normal mean.

The profile posterior multiplies the profile likelihood of mu by a prior on
mu.  It is built two ways here: by normalising on a grid, and by a two-block
Gibbs sampler on the joint posterior of (mu, sigma2) under the Jeffreys
prior on sigma2, whose mu-marginal is the same distribution.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from . import closed_forms as cf
from .core import LogCurve, ScalarSample, logtrapz, sum_sq_dev
from .errors import DegenerateSample, GridTooNarrow, InvalidInit, InvalidInput, TooFewDraws, TooFewObservations
from .rng import stream

TAIL_RATIO = 1e-8
NORMALIZATION_TOL = 1e-8
MIN_DRAWS = 1000


@dataclass(frozen=True)
class MeanPrior:
    """Prior on mu: ``normal`` with mean ``mean`` and variance ``variance``, or ``flat``."""

    kind: str = "flat"
    mean: float = 0.0
    variance: float = 1.0

    def __post_init__(self):
        if self.kind not in ("normal", "flat"):
            raise InvalidInput(f"unknown prior kind {self.kind!r}")
        if self.kind == "normal" and not self.variance > 0:
            raise InvalidInput("normal prior needs variance > 0")

    @classmethod
    def normal(cls, mean=0.0, variance=1.0):
        return cls("normal", float(mean), float(variance))

    @classmethod
    def flat(cls):
        return cls("flat")

    @classmethod
    def parse(cls, text: str) -> "MeanPrior":
        """``"flat"`` or ``"normal:m0,tau2"``."""
        text = text.strip()
        if text == "flat":
            return cls.flat()
        if text.startswith("normal:"):
            try:
                m0, tau2 = (float(v) for v in text[len("normal:"):].split(","))
            except ValueError:
                raise InvalidInput(f"cannot parse prior {text!r}; expected normal:m0,tau2") from None
            return cls.normal(m0, tau2)
        raise InvalidInput(f"cannot parse prior {text!r}")

    @property
    def tag(self) -> str:
        if self.kind == "flat":
            return "flat"
        return f"normal:{self.mean:g},{self.variance:g}"

    def log_density(self, mu):
        mu = np.asarray(mu, dtype=float)
        if self.kind == "flat":
            return np.zeros_like(mu)
        return (-0.5 * math.log(2.0 * math.pi * self.variance)
                - 0.5 * (mu - self.mean) ** 2 / self.variance)


# The three priors displayed alongside each other for the n = 10 example.
FIGURE_PRIORS = (MeanPrior.normal(0.0, 1.0), MeanPrior.normal(0.0, 4.0), MeanPrior.flat())


def grid_profile_posterior(sample: ScalarSample, prior: MeanPrior, grid, *,
                           likelihood="profile") -> LogCurve:
    """Log posterior density of mu on ``grid``, normalised by the trapezoid rule.

    ``likelihood="marginal"`` builds the same curve from the Jeffreys
    marginal likelihood instead of the profile.

    Raises
    ------
    GridTooNarrow
        If the density at either end of the grid exceeds 1e-8 of its peak.
    """
    if sample.n < 2:
        raise TooFewObservations(f"need n >= 2, got n={sample.n}")
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 3:
        raise InvalidInput("posterior grid needs at least 3 scalar points")
    loglik = {"profile": cf.log_profile_normal,
              "marginal": cf.log_marginal_normal_jeffreys}[likelihood]
    values = np.array([loglik(sample, g) for g in grid]) + prior.log_density(grid)
    top = values.max()
    if max(values[0], values[-1]) - top > math.log(TAIL_RATIO):
        raise GridTooNarrow(
            f"endpoint density ratio {math.exp(max(values[0], values[-1]) - top):.3g} "
            f"exceeds {TAIL_RATIO:g}; widen the grid")
    values = values - logtrapz(values, grid)
    return LogCurve(grid, values, {"prior": prior.tag, "likelihood": likelihood, "n": sample.n})


def posterior_mode(curve: LogCurve) -> float:
    return float(curve.grid[curve.argmax()])


@dataclass(frozen=True)
class PosteriorDraws:
    mu: np.ndarray
    sigma2: np.ndarray
    seed: int
    burn_in: int
    iterations: int
    prior: str

    def __len__(self):
        return int(self.mu.size)

    def to_csv(self) -> str:
        """CSV with columns iteration, mu, sigma2; iteration counts from 1 and
        includes the burn-in offset."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["iteration", "mu", "sigma2"])
        for k, (m, s) in enumerate(zip(self.mu, self.sigma2), start=self.burn_in + 1):
            w.writerow([k, repr(float(m)), repr(float(s))])
        return buf.getvalue()


def gibbs_profile_posterior(sample: ScalarSample, prior: MeanPrior, iterations=55_000,
                            burn_in=5_000, seed=None, init=None) -> PosteriorDraws:
    """Two-block Gibbs sampler for p(mu, sigma2 | y) with p(sigma2) = 1/sigma2.

    Each sweep draws

    * mu | sigma2 ~ Normal with precision n/sigma2 + 1/tau2 and mean
      (n ybar / sigma2 + m0 / tau2) / precision (flat prior: precision
      n/sigma2, mean ybar), then
    * sigma2 | mu ~ Inverse-Gamma(n/2, S(mu)/2), as the reciprocal of an
      exact gamma variate.

    The default start is mu = ybar, sigma2 = S(ybar)/n.
    """
    if seed is None:
        raise InvalidInput("Gibbs sampling needs an explicit seed")
    n = sample.n
    if n < 2:
        raise TooFewObservations(f"need n >= 2, got n={n}")
    iterations, burn_in = int(iterations), int(burn_in)
    if not (iterations > burn_in >= 0):
        raise InvalidInput("need iterations > burn_in >= 0")
    ybar = sample.mean
    ss_centre = sum_sq_dev(sample, ybar)
    if not ss_centre > 0:
        raise DegenerateSample("all observations are equal")
    if init is None:
        init = (ybar, ss_centre / n)
    mu, s2 = float(init[0]), float(init[1])
    if not (math.isfinite(mu) and math.isfinite(s2) and s2 > 0):
        raise InvalidInit(f"invalid initial state mu={mu}, sigma2={s2}")

    # separate substreams, so a longer chain extends a shorter one exactly
    z = stream(seed, 0).standard_normal(iterations)
    g = stream(seed, 1).standard_gamma(0.5 * n, iterations)
    mus = np.empty(iterations)
    s2s = np.empty(iterations)
    normal_prior = prior.kind == "normal"
    inv_tau2 = 1.0 / prior.variance if normal_prior else 0.0
    m0_term = prior.mean * inv_tau2 if normal_prior else 0.0
    for it in range(iterations):
        prec = n / s2 + inv_tau2
        mean = (n * ybar / s2 + m0_term) / prec
        mu = mean + z[it] / math.sqrt(prec)
        # S(mu) = S(ybar) + n (ybar - mu)^2
        s2 = 0.5 * (ss_centre + n * (ybar - mu) ** 2) / g[it]
        mus[it] = mu
        s2s[it] = s2
    mus = mus[burn_in:]
    s2s = s2s[burn_in:]
    mus.setflags(write=False)
    s2s.setflags(write=False)
    return PosteriorDraws(mus, s2s, int(seed), burn_in, iterations, prior.tag)


def summarize_draws(draws: PosteriorDraws, edges) -> LogCurve:
    """Histogram density of the mu draws with bins given by ``edges``.

    Each bin's value is log(count / total draws / width), so draws outside
    the edges still count toward the total.  The returned curve sits on
    the bin centres; empty bins are ``-inf`` and are flagged unusable.
    """
    if len(draws) < MIN_DRAWS:
        raise TooFewDraws(f"need at least {MIN_DRAWS} retained draws, got {len(draws)}")
    edges = np.asarray(edges, dtype=float)
    if edges.ndim != 1 or edges.size < 2 or not np.all(np.diff(edges) > 0):
        raise InvalidInput("bin edges must be a strictly increasing list of >= 2 points")
    counts, _ = np.histogram(draws.mu, bins=edges)
    dens = counts / (len(draws) * np.diff(edges))
    with np.errstate(divide="ignore"):
        values = np.log(dens)
    centres = 0.5 * (edges[:-1] + edges[1:])
    return LogCurve(centres, values, {"prior": draws.prior, "draws": len(draws),
                                      "empty_bins": int(np.sum(counts == 0))})
