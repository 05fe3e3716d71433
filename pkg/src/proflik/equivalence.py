"""Executable profile-versus-marginal comparisons on interest grids."""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import closed_forms as cf
from .core import LogCurve, RegressionSample, ScalarSample, VectorSample, rss, scatter_matrix, sum_sq_dev
from .errors import DegenerateSample, GridMismatch, InvalidInput, RankDeficientDesign, TooFewObservations
from .numeric import (
    inverse_wishart_proposal,
    marginal_mc,
    marginal_numeric,
    mvn_model,
    normal_model,
    profile_numeric,
    regression_model,
)
from .rng import derive_seed

ANALYTIC_TOL = {"normal": 1e-10, "mvn": 1e-9, "regression": 1e-10}
NUMERIC_TOL = 1e-5
MC_SE_MULTIPLIER = 3.0


def _jsonable(x):
    return float(x) if math.isfinite(x) else None


@dataclass
class EquivalenceReport:
    model: str
    grid: np.ndarray
    profile: LogCurve
    marginal: LogCurve
    sup_abs_discrepancy: float
    argmax_profile: int
    argmax_marginal: int
    offset_estimate: float
    tolerance: float
    anchor: int
    excluded: list = field(default_factory=list)
    mode: str = "analytic"
    meta: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.sup_abs_discrepancy <= self.tolerance

    def to_dict(self):
        return {
            "model": self.model,
            "mode": self.mode,
            "grid": self.grid.tolist(),
            "profile": self.profile.to_dict(),
            "marginal": self.marginal.to_dict(),
            "sup_abs_discrepancy": _jsonable(self.sup_abs_discrepancy),
            "argmax_profile": self.argmax_profile,
            "argmax_marginal": self.argmax_marginal,
            "offset_estimate": _jsonable(self.offset_estimate),
            "anchor": self.anchor,
            "tolerance": self.tolerance,
            "excluded": list(self.excluded),
            "pass": self.passed,
            "meta": dict(self.meta),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def compare_curves(profile: LogCurve, marginal: LogCurve, anchor=None, tolerance=1e-10,
                   model="custom", mode="analytic") -> EquivalenceReport:
    """Anchor both curves at one grid index and measure their sup distance.

    Points that are non-finite in either curve are excluded and listed.  The
    anchor defaults to the profile argmax.  ``offset_estimate`` is the mean
    of ``marginal - profile`` over usable points before anchoring.
    """
    if profile.grid.shape != marginal.grid.shape or not np.array_equal(profile.grid, marginal.grid):
        raise GridMismatch("profile and marginal curves are on different grids")
    usable = profile.usable & marginal.usable
    if not usable.any():
        raise InvalidInput("no grid point is usable in both curves")
    excluded = [int(i) for i in np.flatnonzero(~usable)]
    p = np.where(usable, profile.values, np.nan)
    m = np.where(usable, marginal.values, np.nan)
    if anchor is None:
        anchor = int(np.nanargmax(p))
    anchor = int(anchor)
    if not 0 <= anchor < p.size or not usable[anchor]:
        raise InvalidInput(f"anchor index {anchor} is not usable in both curves")
    ap = p - p[anchor]
    am = m - m[anchor]
    disc = float(np.nanmax(np.abs(ap - am)))
    offset = float(np.mean((m - p)[usable]))
    return EquivalenceReport(
        model=model,
        grid=profile.grid,
        profile=LogCurve(profile.grid, ap),
        marginal=LogCurve(marginal.grid, am),
        sup_abs_discrepancy=disc,
        argmax_profile=int(np.nanargmax(ap)),
        argmax_marginal=int(np.nanargmax(am)),
        offset_estimate=offset,
        tolerance=float(tolerance),
        anchor=anchor,
        excluded=excluded,
        mode=mode,
    )


def _safe_eval(fn, *args):
    try:
        return fn(*args)
    except DegenerateSample:
        return math.nan


def _product_grid(center, half_widths, points):
    axes = [np.linspace(c - h, c + h, points) for c, h in zip(center, half_widths)]
    return np.array(list(itertools.product(*axes)))


def _points_per_axis(k):
    return {1: 201, 2: 11, 3: 7}.get(k, 5)


def default_normal_grid(sample: ScalarSample, points=201, half_width_se=5.0):
    """ybar +/- 5 s / sqrt(n)."""
    n = sample.n
    ybar = sample.mean
    ss = sum_sq_dev(sample, ybar)
    se = math.sqrt(ss / (n - 1) / n) if n > 1 and ss > 0 else 1.0
    return np.linspace(ybar - half_width_se * se, ybar + half_width_se * se, points)


def verify_normal(sample: ScalarSample, grid=None, mode="analytic", tolerance=None):
    """Compare the scalar profile and Jeffreys-marginal curves over a mu grid.

    ``mode="analytic"`` uses the closed forms; ``mode="numeric"`` uses the
    simplex profile and the adaptive-quadrature marginal.  Grid points with
    S(mu) = 0 are excluded.
    """
    if sample.n < 2:
        raise TooFewObservations(f"need n >= 2, got n={sample.n}")
    grid = default_normal_grid(sample) if grid is None else np.asarray(grid, dtype=float)
    degenerate = np.array([sum_sq_dev(sample, g) == 0.0 for g in grid])
    if mode == "analytic":
        prof = [_safe_eval(cf.log_profile_normal, sample, g) for g in grid]
        marg = [_safe_eval(cf.log_marginal_normal_jeffreys, sample, g) for g in grid]
        tol = ANALYTIC_TOL["normal"] if tolerance is None else tolerance
    elif mode == "numeric":
        model = normal_model()
        prof, marg = [], []
        for g, bad in zip(grid, degenerate):
            if bad:
                prof.append(math.nan)
                marg.append(math.nan)
                continue
            prof.append(profile_numeric(model, sample, g)[0])
            marg.append(marginal_numeric(model, sample, g, _jeffreys_variance))
        tol = NUMERIC_TOL if tolerance is None else tolerance
    else:
        raise InvalidInput(f"unknown mode {mode!r}")
    return compare_curves(LogCurve(grid, prof), LogCurve(grid, marg), tolerance=tol,
                          model="normal", mode=mode)


def _jeffreys_variance(nu):
    return cf.log_jeffreys_prior_variance(nu[0])


def default_mvn_grid(sample: VectorSample, points=None, half_width_se=3.0):
    n, d = sample.n, sample.d
    ybar = sample.mean
    sd = np.sqrt(np.diag(scatter_matrix(sample, ybar)) / max(n - 1, 1))
    sd[sd == 0] = 1.0
    return _product_grid(ybar, half_width_se * sd / math.sqrt(n), points or _points_per_axis(d))


def verify_mvn(sample: VectorSample, grid=None, mode="analytic", tolerance=None, *,
               draws=5000, seed=None):
    """Multivariate analogue of :func:`verify_normal` (nuisance Sigma).

    In numeric mode the marginal comes from importance sampling with an
    Inverse-Wishart(n - 1, A(mu)) proposal, and the pass tolerance is the
    numeric floor plus three combined standard errors against the anchor.
    The integrand is Inverse-Wishart(n, A(mu)) in Sigma, so this proposal
    gives weights proportional to |Sigma|^(-1/2), which have every moment;
    proposals with more degrees of freedom than n give weights growing like
    a power of |Sigma| and an unreliable delta-method standard error.
    """
    n, d = sample.n, sample.d
    if n <= d:
        raise TooFewObservations(f"need n >= d+1 = {d + 1}, got n={n}")
    if grid is None:
        grid = default_mvn_grid(sample)
    grid = np.asarray(grid, dtype=float).reshape(-1, d)
    if mode == "analytic":
        prof = [_safe_eval(cf.log_profile_mvn, sample, g) for g in grid]
        marg = [_safe_eval(cf.log_marginal_mvn_jeffreys, sample, g) for g in grid]
        tol = ANALYTIC_TOL["mvn"] if tolerance is None else tolerance
        return compare_curves(LogCurve(grid, prof), LogCurve(grid, marg), tolerance=tol,
                              model="mvn", mode=mode)
    if mode != "numeric":
        raise InvalidInput(f"unknown mode {mode!r}")
    if seed is None:
        raise InvalidInput("numeric mvn verification needs an explicit seed")
    model = mvn_model(d)
    prof, marg, se = [], [], []
    for i, g in enumerate(grid):
        A = scatter_matrix(sample, g)
        try:
            np.linalg.cholesky(A)
        except np.linalg.LinAlgError:
            prof.append(math.nan)
            marg.append(math.nan)
            se.append(math.nan)
            continue
        prof.append(profile_numeric(model, sample, g, A / n)[0])
        lv, s = marginal_mc(model, sample, g, cf.log_jeffreys_prior_cov,
                            inverse_wishart_proposal(n - 1, A), draws, derive_seed(seed, i))
        marg.append(lv)
        se.append(s)
    pc, mc = LogCurve(grid, prof), LogCurve(grid, marg)
    report = compare_curves(pc, mc, model="mvn", mode=mode)
    se = np.array(se)
    k = report.anchor
    usable = np.isfinite(se)
    combined = np.sqrt(se[usable] ** 2 + se[k] ** 2)
    tol = NUMERIC_TOL + MC_SE_MULTIPLIER * float(combined.max())
    report.tolerance = tol if tolerance is None else tolerance
    report.meta["std_errors"] = [_jsonable(v) for v in se]
    return report


def _check_rank(sample: RegressionSample):
    if np.linalg.matrix_rank(sample.X) < sample.q:
        raise RankDeficientDesign(f"design matrix has rank below q={sample.q}")


def least_squares(sample: RegressionSample):
    _check_rank(sample)
    beta, *_ = np.linalg.lstsq(sample.X, sample.y, rcond=None)
    return beta


def default_regression_grid(sample: RegressionSample, points=None, half_width_se=3.0):
    n, q = sample.n, sample.q
    beta = least_squares(sample)
    dof = n - q if n > q else n
    s2 = rss(sample, beta) / dof
    if not s2 > 0:
        s2 = 1.0
    cov = s2 * np.linalg.inv(sample.X.T @ sample.X)
    se = np.sqrt(np.diag(cov))
    return _product_grid(beta, half_width_se * se, points or _points_per_axis(q))


def verify_regression(sample: RegressionSample, grid=None, mode="analytic", tolerance=None):
    """Compare profile and Jeffreys-marginal curves over a beta grid."""
    if sample.n < 2:
        raise TooFewObservations(f"need n >= 2, got n={sample.n}")
    _check_rank(sample)
    q = sample.q
    grid = default_regression_grid(sample) if grid is None else np.asarray(grid, dtype=float)
    grid = grid.reshape(-1, q)
    if mode == "analytic":
        prof = [_safe_eval(cf.log_profile_regression, sample, g) for g in grid]
        marg = [_safe_eval(cf.log_marginal_regression_jeffreys, sample, g) for g in grid]
        tol = ANALYTIC_TOL["regression"] if tolerance is None else tolerance
    elif mode == "numeric":
        model = regression_model(q)
        prof, marg = [], []
        for g in grid:
            if rss(sample, g) == 0.0:
                prof.append(math.nan)
                marg.append(math.nan)
                continue
            prof.append(profile_numeric(model, sample, g)[0])
            marg.append(marginal_numeric(model, sample, g, _jeffreys_variance))
        tol = NUMERIC_TOL if tolerance is None else tolerance
    else:
        raise InvalidInput(f"unknown mode {mode!r}")
    return compare_curves(LogCurve(grid, prof), LogCurve(grid, marg), tolerance=tol,
                          model="regression", mode=mode)
