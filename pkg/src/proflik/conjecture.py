"""Profile versus Jeffreys-marginal discrepancy for non-normal families.

For the normal family the anchored profile and Jeffreys-marginal curves are
identical, so their sup distance ``D_n`` only measures numeric error.  For
other exponential families nothing is known exactly; this module measures
``D_n`` as a function of sample size so the trend can be inspected.  No
claim about the trend is made here.

Adding a family: build a :class:`FamilySpec` around a
:class:`~proflik.numeric.NuisanceModel` that has a ``sampler`` (and
ideally an ``analytic_nuisance_fisher``), plus a ``center_and_se`` hook
returning the interest MLE and its standard error.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import LogCurve, ScalarSample, sum_sq_dev
from .equivalence import compare_curves
from .errors import InvalidInput, ProflikError, ScanFailed
from .numeric import (
    NuisanceModel,
    gamma_mean_shape_model,
    jeffreys_log_prior_numeric,
    marginal_numeric,
    normal_model,
    profile_numeric,
)
from .rng import derive_seed, stream


@dataclass(frozen=True)
class GridSpec:
    """Interest grid: MLE +/- ``half_width_se`` standard errors, ``points`` points."""

    half_width_se: float = 4.0
    points: int = 41

    def __post_init__(self):
        if self.points < 41:
            raise InvalidInput("conjecture grids need at least 41 points")
        if not self.half_width_se > 0:
            raise InvalidInput("half_width_se must be positive")


@dataclass(frozen=True)
class FamilySpec:
    tag: str
    model: NuisanceModel
    center_and_se: Callable
    min_n: int = 2
    jeffreys_method: str = "auto"
    default_truth: tuple = ()

    def __post_init__(self):
        if self.model.sampler is None:
            raise InvalidInput(f"family {self.tag!r} needs a model with a data sampler")

    def sample(self, interest, nuisance, n, seed):
        return self.model.sampler(interest, np.atleast_1d(np.asarray(nuisance, dtype=float)),
                                  int(n), stream(seed))


def _normal_center(data: ScalarSample, model):
    n = data.n
    ybar = data.mean
    return ybar, math.sqrt(sum_sq_dev(data, ybar) / n / n)


def _gamma_center(data: ScalarSample, model):
    # the mean MLE is ybar whatever the shape; interest and shape are orthogonal
    ybar = data.mean
    _, alpha = profile_numeric(model, data, ybar)
    return ybar, ybar / math.sqrt(data.n * float(alpha[0]))


def normal_control_family() -> FamilySpec:
    return FamilySpec("normal-control", normal_model(), _normal_center, 2,
                      default_truth=(0.0, 1.0))


def gamma_mean_shape_family() -> FamilySpec:
    return FamilySpec("gamma-mean-shape", gamma_mean_shape_model(), _gamma_center, 2,
                      default_truth=(2.0, 1.5))


FAMILIES = {
    "normal-control": normal_control_family,
    "gamma-mean-shape": gamma_mean_shape_family,
}


@dataclass
class CellResult:
    discrepancy: float
    center: float
    se: float
    excluded: list = field(default_factory=list)


def discrepancy_on_data(family: FamilySpec, data, grid_spec: GridSpec = GridSpec()) -> CellResult:
    """Sup anchored distance between numeric profile and Jeffreys marginal on ``data``.

    The Jeffreys prior is the per-observation nuisance information scaled by
    n; the scaling only shifts the marginal by a constant.
    """
    model = family.model
    n = data.n
    center, se = family.center_and_se(data, model)
    if not (math.isfinite(se) and se > 0):
        raise InvalidInput("family returned a non-positive standard error")
    h = grid_spec.half_width_se * se
    grid = np.linspace(center - h, center + h, grid_spec.points)
    k = model.nuisance_dim
    prof = np.full(grid.size, math.nan)
    marg = np.full(grid.size, math.nan)
    for i, g in enumerate(grid):

        def log_prior(nu, g=g):
            return (jeffreys_log_prior_numeric(model, g, nu, family.jeffreys_method)
                    + 0.5 * k * math.log(n))

        try:
            p, argmax = profile_numeric(model, data, g)
            m = marginal_numeric(model, data, g, log_prior, init=argmax)
        except ProflikError:
            continue
        prof[i], marg[i] = p, m
    report = compare_curves(LogCurve(grid, prof), LogCurve(grid, marg), tolerance=math.inf,
                            model=family.tag, mode="numeric")
    return CellResult(report.sup_abs_discrepancy, center, se, report.excluded)


def discrepancy_once(family: FamilySpec, interest, nuisance, n: int, seed: int,
                     grid_spec: GridSpec = GridSpec()) -> CellResult:
    if n < family.min_n:
        raise InvalidInput(f"{family.tag} needs n >= {family.min_n}, got n={n}")
    data = family.sample(interest, nuisance, n, seed)
    return discrepancy_on_data(family, data, grid_spec)


@dataclass
class DiscrepancyTable:
    rows: list
    summaries: list
    family: str
    master_seed: int

    COLUMNS = ("family", "n", "replicate", "seed", "discrepancy", "grid_center",
               "grid_half_width", "grid_points", "excluded", "error")

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.COLUMNS)
        for r in self.rows:
            w.writerow([_fmt(r[c]) for c in self.COLUMNS])
        return buf.getvalue()

    def summary_dict(self) -> dict:
        return {"family": self.family, "master_seed": self.master_seed,
                "summaries": [{k: _jsonable(v) for k, v in s.items()} for s in self.summaries]}

    def medians(self) -> dict:
        return {s["n"]: s["median"] for s in self.summaries}


def _fmt(v):
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else ""
    return str(v)


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def discrepancy_scan(family: FamilySpec, interest, nuisance, ns, replicates: int,
                     master_seed: int, grid_spec: GridSpec = GridSpec()) -> DiscrepancyTable:
    """Run :func:`discrepancy_once` over ``ns`` x ``replicates`` seeded cells.

    Cell ``(n, r)`` uses the seed derived from ``(master_seed, n, r)``.
    Failed cells are kept with an error tag; more than half failing raises
    :class:`ScanFailed`.
    """
    ns = [int(n) for n in ns]
    if not ns or any(b <= a for a, b in zip(ns, ns[1:])):
        raise InvalidInput("n list must be nonempty and strictly increasing")
    if replicates < 1:
        raise InvalidInput("replicates must be >= 1")
    rows = []
    failures = 0
    for n in ns:
        for r in range(replicates):
            seed = derive_seed(master_seed, n, r)
            row = {"family": family.tag, "n": n, "replicate": r, "seed": seed,
                   "discrepancy": math.nan, "grid_center": math.nan,
                   "grid_half_width": math.nan, "grid_points": grid_spec.points,
                   "excluded": 0, "error": ""}
            try:
                res = discrepancy_once(family, interest, nuisance, n, seed, grid_spec)
            except ProflikError as exc:
                failures += 1
                row["error"] = type(exc).__name__
            else:
                row.update(discrepancy=res.discrepancy, grid_center=res.center,
                           grid_half_width=grid_spec.half_width_se * res.se,
                           excluded=len(res.excluded))
            rows.append(row)
    if failures * 2 > len(rows):
        raise ScanFailed(f"{failures} of {len(rows)} cells failed")
    summaries = []
    for n in ns:
        vals = np.array([r["discrepancy"] for r in rows if r["n"] == n and not r["error"]])
        summaries.append({
            "n": n,
            "cells": int(vals.size),
            "median": float(np.median(vals)) if vals.size else math.nan,
            "upper_quartile": float(np.percentile(vals, 75)) if vals.size else math.nan,
        })
    return DiscrepancyTable(rows, summaries, family.tag, int(master_seed))
