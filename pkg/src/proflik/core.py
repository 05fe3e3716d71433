"""Data containers, sums of squares and log-curve utilities.

Everything likelihood-like in this package lives in log space.  The
containers below are immutable: arrays are copied on construction and
flagged read-only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import InvalidInput


def _frozen(a, dtype=float):
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


def _require_finite(arr, what):
    if not np.all(np.isfinite(arr)):
        raise InvalidInput(f"{what} contains non-finite entries")


@dataclass(frozen=True)
class ScalarSample:
    """Observations ``y_1..y_n`` of a scalar normal model."""

    y: np.ndarray

    def __post_init__(self):
        y = _frozen(self.y)
        if y.ndim != 1 or y.size < 1:
            raise InvalidInput("ScalarSample needs a nonempty 1-d array")
        _require_finite(y, "y")
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return int(self.y.size)

    @property
    def mean(self) -> float:
        return math.fsum(self.y) / self.n


@dataclass(frozen=True)
class VectorSample:
    """``n`` observations of a ``d``-variate normal, one per row."""

    rows: np.ndarray

    def __post_init__(self):
        rows = _frozen(self.rows)
        if rows.ndim == 1:
            rows = _frozen(rows.reshape(-1, 1))
        if rows.ndim != 2 or rows.shape[0] < 1 or rows.shape[1] < 1:
            raise InvalidInput("VectorSample needs an (n, d) array with n, d >= 1")
        _require_finite(rows, "rows")
        object.__setattr__(self, "rows", rows)

    @property
    def n(self) -> int:
        return int(self.rows.shape[0])

    @property
    def d(self) -> int:
        return int(self.rows.shape[1])

    @property
    def mean(self) -> np.ndarray:
        return np.array([math.fsum(col) for col in self.rows.T]) / self.n


@dataclass(frozen=True)
class RegressionSample:
    """Design matrix ``X`` (n x q) and responses ``y`` (n)."""

    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = _frozen(self.X)
        y = _frozen(self.y)
        if X.ndim == 1:
            X = _frozen(X.reshape(-1, 1))
        if X.ndim != 2 or y.ndim != 1:
            raise InvalidInput("X must be 2-d and y 1-d")
        if X.shape[0] != y.size:
            raise InvalidInput(f"X has {X.shape[0]} rows but y has {y.size} entries")
        if X.shape[1] < 1 or y.size < 1:
            raise InvalidInput("need q >= 1 covariates and n >= 1 responses")
        _require_finite(X, "X")
        _require_finite(y, "y")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return int(self.y.size)

    @property
    def q(self) -> int:
        return int(self.X.shape[1])


@dataclass(frozen=True)
class LogCurve:
    """Interest-parameter grid paired with log values.

    ``grid`` is either a strictly increasing 1-d array of scalar points or an
    ``(m, k)`` array listing vector points explicitly.  Non-finite entries of
    ``values`` mark unusable points.
    """

    grid: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        grid = _frozen(self.grid)
        values = _frozen(self.values)
        if values.ndim != 1:
            raise InvalidInput("values must be 1-d")
        if grid.shape[0] != values.size:
            raise InvalidInput("grid and values differ in length")
        if values.size < 1:
            raise InvalidInput("empty curve")
        if grid.ndim == 1:
            if values.size > 1 and not np.all(np.diff(grid) > 0):
                raise InvalidInput("scalar grid must be strictly increasing")
        elif grid.ndim != 2:
            raise InvalidInput("grid must be 1-d or an (m, k) point list")
        _require_finite(grid, "grid")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    def __len__(self):
        return int(self.values.size)

    @property
    def usable(self) -> np.ndarray:
        return np.isfinite(self.values)

    def argmax(self) -> int:
        """Index of the largest usable value (first one on ties)."""
        if not self.usable.any():
            raise InvalidInput("curve has no usable points")
        return int(np.argmax(np.where(self.usable, self.values, -np.inf)))

    def to_dict(self) -> dict[str, Any]:
        return {
            "grid": self.grid.tolist(),
            "log_values": [float(v) if math.isfinite(v) else None for v in self.values],
            "meta": dict(self.meta),
        }


def sum_sq_dev(sample: ScalarSample, mu: float) -> float:
    """S(mu) = sum (y_i - mu)^2, with correctly rounded summation."""
    mu = float(mu)
    if not math.isfinite(mu):
        raise InvalidInput("mu must be finite")
    dev = sample.y - mu
    return math.fsum(dev * dev)


def scatter_matrix(sample: VectorSample, mu) -> np.ndarray:
    """A(mu) = sum (y_i - mu)(y_i - mu)^T."""
    mu = np.asarray(mu, dtype=float).reshape(-1)
    if mu.size != sample.d:
        raise InvalidInput(f"mu has dimension {mu.size}, sample has d={sample.d}")
    dev = sample.rows - mu
    d = sample.d
    A = np.empty((d, d))
    for i in range(d):
        for j in range(i, d):
            A[i, j] = A[j, i] = math.fsum(dev[:, i] * dev[:, j])
    return A


def rss(sample: RegressionSample, beta) -> float:
    """Residual sum of squares sum (y_i - x_i^T beta)^2."""
    beta = np.asarray(beta, dtype=float).reshape(-1)
    if beta.size != sample.q:
        raise InvalidInput(f"beta has dimension {beta.size}, design has q={sample.q}")
    r = sample.y - sample.X @ beta
    return math.fsum(r * r)


def anchor_curve(curve: LogCurve, index: int) -> LogCurve:
    """Shift ``curve`` so that its value at ``index`` is exactly zero."""
    index = int(index)
    if not 0 <= index < len(curve):
        raise InvalidInput(f"anchor index {index} out of range for {len(curve)} points")
    ref = curve.values[index]
    if not math.isfinite(ref):
        raise InvalidInput(f"value at anchor index {index} is not finite")
    values = curve.values - ref
    return LogCurve(curve.grid, values, dict(curve.meta))


def logtrapz(log_f: np.ndarray, x: np.ndarray) -> float:
    """log of the trapezoid-rule integral of exp(log_f) over x."""
    log_f = np.asarray(log_f, dtype=float)
    top = np.max(log_f)
    if not math.isfinite(top):
        raise InvalidInput("integrand has no finite values")
    return math.log(np.trapezoid(np.exp(log_f - top), x)) + top
