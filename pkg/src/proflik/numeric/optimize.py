"""Derivative-free maximisation and numeric profile likelihoods."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DomainEscape, NonConvergence
from .model import NuisanceModel

# reflection, expansion, contraction, shrink
_ALPHA, _GAMMA, _RHO, _SIGMA = 1.0, 2.0, 0.5, 0.5

FD_STEP = np.finfo(float).eps ** (1.0 / 3.0)


@dataclass
class SimplexResult:
    x: np.ndarray
    fun: float
    converged: bool
    iterations: int
    evaluations: int
    restarts: int
    grad_norm: float


def _safe(f):
    def g(x):
        try:
            with np.errstate(all="ignore"):
                v = float(f(x))
        except (ValueError, FloatingPointError, OverflowError, ZeroDivisionError,
                np.linalg.LinAlgError):
            return -math.inf
        return v if math.isfinite(v) else -math.inf
    return g


def fd_gradient(f, x):
    """Central differences with step eps^(1/3) * (1 + |x_i|)."""
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for i in range(x.size):
        h = FD_STEP * (1.0 + abs(x[i]))
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        g[i] = (f(xp) - f(xm)) / (xp[i] - xm[i])
    return g


def fd_hessian(f, x):
    """Central second differences; step eps^(1/3) * (1 + |x_i|) per coordinate."""
    x = np.asarray(x, dtype=float)
    k = x.size
    h = FD_STEP * (1.0 + np.abs(x))
    H = np.empty((k, k))
    f0 = f(x)
    for i in range(k):
        e_i = np.zeros(k)
        e_i[i] = h[i]
        H[i, i] = (f(x + e_i) - 2.0 * f0 + f(x - e_i)) / (h[i] * h[i])
        for j in range(i):
            e_j = np.zeros(k)
            e_j[j] = h[j]
            H[i, j] = H[j, i] = (f(x + e_i + e_j) - f(x + e_i - e_j)
                                 - f(x - e_i + e_j) + f(x - e_i - e_j)) / (4.0 * h[i] * h[j])
    return H


def _polish(f, x, fx, steps=3):
    """A few finite-difference Newton steps, each kept only if it helps.

    The spread rule leaves the argmax uncertain at about sqrt(ftol); near a
    smooth maximum one or two Newton steps remove that slack.
    """
    for _ in range(steps):
        H = fd_hessian(f, x)
        g = fd_gradient(f, x)
        if not (np.all(np.isfinite(H)) and np.all(np.isfinite(g))):
            break
        try:
            np.linalg.cholesky(-H)
        except np.linalg.LinAlgError:
            break
        x_new = x - np.linalg.solve(H, g)
        f_new = f(x_new)
        if not f_new >= fx:
            break
        done = np.array_equal(x_new, x)
        x, fx = x_new, f_new
        if done:
            break
    return x, fx


def _stationary(f, x, fx, gtol):
    g = fd_gradient(f, x)
    norm = float(np.linalg.norm(g)) if np.all(np.isfinite(g)) else math.inf
    return norm <= gtol * (1.0 + abs(fx)), norm


def maximize_simplex(f, x0, *, step=0.25, ftol=1e-10, gtol=1e-6, max_iter=None,
                     max_restarts=5, seed=0, polish=True):
    """Maximise ``f`` with a Nelder-Mead simplex.

    An attempt stops once the spread of ``f`` over the simplex is below
    ``ftol`` *and* the central-difference gradient at the best vertex has
    norm below ``gtol * (1 + |f|)``.  An attempt that exhausts ``max_iter``
    iterations (default ``500 * dim``) is restarted from a jittered copy of
    the best point, at most ``max_restarts`` times.  Non-finite values count
    as minus infinity.  With ``polish`` a converged result is refined by
    finite-difference Newton steps that are kept only if they raise ``f``
    (never when the Hessian is not negative definite).  The returned ``converged`` flag says whether the
    stopping rule was met; ``x`` is always the best point seen.
    """
    f = _safe(f)
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    dim = x0.size
    if max_iter is None:
        max_iter = 500 * dim
    rng = np.random.default_rng(seed)
    nfev = 0
    total_iter = 0

    def cost(x):
        nonlocal nfev
        nfev += 1
        return -f(x)

    best_x, best_c = x0.copy(), cost(x0)
    start = x0.copy()
    grad_norm = math.inf
    for attempt in range(max_restarts + 1):
        if attempt > 0:
            step *= 0.5
            start = best_x + 0.1 * step * rng.standard_normal(dim)
        pts = [start.copy()]
        for i in range(dim):
            p = start.copy()
            p[i] += step
            pts.append(p)
        sim = np.array(pts)
        fs = np.array([cost(p) for p in sim])
        if not np.any(np.isfinite(fs)):
            if math.isfinite(best_c):
                continue
            raise DomainEscape("every simplex vertex evaluates outside the domain")

        for _ in range(max_iter):
            total_iter += 1
            order = np.argsort(fs, kind="stable")
            sim, fs = sim[order], fs[order]
            if fs[0] < best_c:
                best_x, best_c = sim[0].copy(), fs[0]
            # a simplex collapsed by rounding carries no curvature information
            collapsed = not np.any(sim[1:] != sim[0])
            if math.isfinite(fs[-1]) and fs[-1] - fs[0] < ftol and not collapsed:
                ok, grad_norm = _stationary(f, sim[0], -fs[0], gtol)
                nfev += 2 * dim
                if ok:
                    if fs[0] <= best_c:
                        best_x, best_c = sim[0].copy(), fs[0]
                    if polish:
                        px, pf = _polish(lambda x: -cost(x), best_x, -best_c)
                        best_x, best_c = px, -pf
                    return SimplexResult(best_x, -best_c, True, total_iter, nfev, attempt, grad_norm)

            centroid = sim[:-1].mean(axis=0)
            worst = sim[-1]
            xr = centroid + _ALPHA * (centroid - worst)
            fr = cost(xr)
            if fr < fs[0]:
                xe = centroid + _GAMMA * (centroid - worst)
                fe = cost(xe)
                if fe < fr:
                    sim[-1], fs[-1] = xe, fe
                else:
                    sim[-1], fs[-1] = xr, fr
                continue
            if fr < fs[-2]:
                sim[-1], fs[-1] = xr, fr
                continue
            if fr < fs[-1]:
                xc = centroid + _RHO * (xr - centroid)
                fc = cost(xc)
                if fc <= fr:
                    sim[-1], fs[-1] = xc, fc
                    continue
            else:
                xc = centroid + _RHO * (worst - centroid)
                fc = cost(xc)
                if fc < fs[-1]:
                    sim[-1], fs[-1] = xc, fc
                    continue
            sim[1:] = sim[0] + _SIGMA * (sim[1:] - sim[0])
            fs[1:] = [cost(p) for p in sim[1:]]

        order = np.argsort(fs, kind="stable")
        if fs[order[0]] < best_c:
            best_x, best_c = sim[order[0]].copy(), fs[order[0]]

    if not math.isfinite(best_c):
        raise DomainEscape("no evaluation stayed inside the domain")
    return SimplexResult(best_x, -best_c, False, total_iter, nfev, max_restarts, grad_norm)


def profile_numeric(model: NuisanceModel, data, interest, init=None):
    """Maximise the log density over the nuisance at a fixed interest point.

    Optimisation runs in unconstrained coordinates (log for positive
    coordinates, log-Cholesky for covariance matrices).

    Returns
    -------
    log_value : float
    argmax : ndarray
        Maximising nuisance in natural form.
    """
    if init is None:
        init = model.start(data, interest)
    theta0 = model.to_unconstrained(init)

    def f(theta):
        return model.log_density(data, interest, model.from_unconstrained(theta))

    res = maximize_simplex(f, theta0)
    if not res.converged:
        raise NonConvergence(
            f"{model.name}: simplex did not reach a stationary point "
            f"(gradient norm {res.grad_norm:.3g} after {res.iterations} iterations)")
    return res.fun, model.from_unconstrained(res.x)
