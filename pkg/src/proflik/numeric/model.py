"""Parametric families split into interest and nuisance parameters."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable, Optional, Union

import numpy as np

from ..errors import InvalidInput

UNCONSTRAINED = "unconstrained"
POSITIVE = "positive"
PD_MATRIX = "positive-definite-matrix"

_VECTOR_TAGS = (UNCONSTRAINED, POSITIVE)


def _matrix_dim(k):
    d = int(round((math.sqrt(8 * k + 1) - 1) / 2))
    if d * (d + 1) // 2 != k:
        raise InvalidInput(f"nuisance_dim={k} is not a triangular number")
    return d


@dataclass(frozen=True)
class NuisanceModel:
    """A family with exact log density ``log_density(data, interest, nuisance)``.

    Nuisance points are passed to ``log_density`` in their natural form: a
    1-d array for vector domains, a symmetric ``(d, d)`` matrix for the
    positive-definite domain.  Internally the engine works in flat natural
    coordinates (the vector itself, or the lower triangle of the matrix) and
    in unconstrained coordinates (log for positive entries, log-Cholesky for
    matrices).

    Parameters
    ----------
    name : str
    interest_dim, nuisance_dim : int
        Number of free coordinates; for a ``d x d`` matrix nuisance
        ``nuisance_dim = d (d + 1) / 2``.
    log_density : callable
        Exact log density of the whole dataset, constants included.
    nuisance_domain : str or tuple of str
        Either one tag per coordinate (``"unconstrained"`` / ``"positive"``)
        or the single tag ``"positive-definite-matrix"``.
    analytic_nuisance_fisher : callable, optional
        ``(interest, nuisance) -> (k, k)`` expected information of one
        observation, in flat natural coordinates.
    sampler : callable, optional
        ``(interest, nuisance, n, rng) -> data`` drawing ``n`` observations.
    initial_nuisance : callable, optional
        ``(data, interest) -> nuisance`` starting point for optimisation.
    """

    name: str
    interest_dim: int
    nuisance_dim: int
    log_density: Callable[[Any, Any, Any], float]
    nuisance_domain: Union[str, tuple]
    analytic_nuisance_fisher: Optional[Callable] = None
    sampler: Optional[Callable] = None
    initial_nuisance: Optional[Callable] = None

    def __post_init__(self):
        if self.interest_dim < 1:
            raise InvalidInput("interest_dim must be a positive integer")
        if self.nuisance_dim < 1:
            raise InvalidInput("nuisance_dim must be a positive integer (nuisance-free models are rejected)")
        dom = self.nuisance_domain
        if isinstance(dom, str):
            if dom == PD_MATRIX:
                _matrix_dim(self.nuisance_dim)
            elif dom in _VECTOR_TAGS:
                dom = (dom,) * self.nuisance_dim
            else:
                raise InvalidInput(f"unknown domain tag {dom!r}")
        else:
            dom = tuple(dom)
            if len(dom) != self.nuisance_dim or any(t not in _VECTOR_TAGS for t in dom):
                raise InvalidInput("need one unconstrained/positive tag per nuisance coordinate")
        object.__setattr__(self, "nuisance_domain", dom)

    @property
    def is_matrix(self) -> bool:
        return self.nuisance_domain == PD_MATRIX

    @property
    def matrix_dim(self) -> int:
        return _matrix_dim(self.nuisance_dim)

    # natural <-> flat natural coordinates

    def pack(self, nuisance) -> np.ndarray:
        if self.is_matrix:
            S = np.atleast_2d(np.asarray(nuisance, dtype=float))
            d = self.matrix_dim
            if S.shape != (d, d):
                raise InvalidInput(f"expected a {d}x{d} matrix nuisance")
            return S[np.tril_indices(d)].copy()
        x = np.asarray(nuisance, dtype=float).reshape(-1)
        if x.size != self.nuisance_dim:
            raise InvalidInput(f"expected {self.nuisance_dim} nuisance coordinates, got {x.size}")
        return x

    def unpack(self, flat) -> np.ndarray:
        flat = np.asarray(flat, dtype=float).reshape(-1)
        if not self.is_matrix:
            return flat
        d = self.matrix_dim
        S = np.zeros((d, d))
        S[np.tril_indices(d)] = flat
        return S + np.tril(S, -1).T

    # natural <-> unconstrained coordinates

    def to_unconstrained(self, nuisance) -> np.ndarray:
        if self.is_matrix:
            S = np.atleast_2d(np.asarray(nuisance, dtype=float))
            try:
                L = np.linalg.cholesky(0.5 * (S + S.T))
            except np.linalg.LinAlgError:
                raise InvalidInput("nuisance matrix is not positive definite") from None
            L = L.copy()
            idx = np.diag_indices_from(L)
            L[idx] = np.log(L[idx])
            return L[np.tril_indices(self.matrix_dim)]
        x = self.pack(nuisance)
        t = x.copy()
        for i, tag in enumerate(self.nuisance_domain):
            if tag == POSITIVE:
                if not x[i] > 0:
                    raise InvalidInput(f"nuisance coordinate {i} must be positive, got {x[i]}")
                t[i] = math.log(x[i])
        if not np.all(np.isfinite(t)):
            raise InvalidInput("nuisance point is not finite")
        return t

    def from_unconstrained(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float).reshape(-1)
        if self.is_matrix:
            d = self.matrix_dim
            L = np.zeros((d, d))
            L[np.tril_indices(d)] = theta
            idx = np.diag_indices(d)
            with np.errstate(over="ignore"):
                L[idx] = np.exp(L[idx])
            return L @ L.T
        x = theta.copy()
        with np.errstate(over="ignore"):
            for i, tag in enumerate(self.nuisance_domain):
                if tag == POSITIVE:
                    x[i] = np.exp(theta[i])
        return x

    def log_jacobian(self, theta) -> float:
        """log |d(natural) / d(unconstrained)| for vector domains."""
        if self.is_matrix:
            raise NotImplementedError("Jacobian only needed for the 1-d quadrature path")
        theta = np.asarray(theta, dtype=float).reshape(-1)
        return float(sum(t for t, tag in zip(theta, self.nuisance_domain) if tag == POSITIVE))

    def start(self, data, interest) -> np.ndarray:
        """Default natural starting point."""
        if self.initial_nuisance is not None:
            return self.initial_nuisance(data, interest)
        if self.is_matrix:
            return np.eye(self.matrix_dim)
        return np.array([1.0 if t == POSITIVE else 0.0 for t in self.nuisance_domain])
