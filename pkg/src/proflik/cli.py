"""Command-line front end.

Exit status: 0 success / pass, 1 equivalence failure, 2 usage or parse
error, 3 computation error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from importlib import resources

import numpy as np

from .conjecture import FAMILIES, GridSpec, discrepancy_scan
from .core import LogCurve, RegressionSample, ScalarSample, VectorSample
from .equivalence import (
    default_mvn_grid,
    default_normal_grid,
    default_regression_grid,
    verify_mvn,
    verify_normal,
    verify_regression,
)
from .errors import InvalidInput, ProflikError
from .posterior import (
    FIGURE_PRIORS,
    MeanPrior,
    grid_profile_posterior,
    gibbs_profile_posterior,
    summarize_draws,
)
from .rng import stream
from .closed_forms import flat_prior_posterior_t

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_COMPUTE = 0, 1, 2, 3
NORMAL_CONTROL_TOL = 1e-5
FIG1_SEED = 20190710


class UsageError(Exception):
    pass


def fixture_path(name="fig1.csv"):
    """Path to a dataset shipped with the package."""
    return resources.files("proflik") / "data" / name


# -- I/O -------------------------------------------------------------------


def _write(path, text):
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc}") from None


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def read_table(path):
    """Header plus float columns from a UTF-8 CSV file."""
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None
    rows = [r for r in rows if r and any(c.strip() for c in r)]
    if not rows:
        raise UsageError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    body = rows[1:]
    try:
        data = np.array([[float(c) for c in r] for r in body], dtype=float)
    except ValueError as exc:
        raise UsageError(f"{path}: non-numeric entry ({exc})") from None
    if body and any(len(r) != len(header) for r in body):
        raise UsageError(f"{path}: ragged rows")
    return header, data.reshape(len(body), len(header))


def _numbered(header, prefix):
    cols = [h for h in header if h.startswith(prefix) and h[len(prefix):].isdigit()]
    cols.sort(key=lambda h: int(h[len(prefix):]))
    expected = [f"{prefix}{i}" for i in range(1, len(cols) + 1)]
    if not cols or cols != expected:
        raise UsageError(f"expected columns {prefix}1..{prefix}k, found {header}")
    return [header.index(c) for c in cols]


def load_sample(path, model):
    header, data = read_table(path)
    try:
        if model == "normal":
            if "y" not in header:
                raise UsageError("scalar model needs a 'y' column")
            return ScalarSample(data[:, header.index("y")])
        if model == "mvn":
            return VectorSample(data[:, _numbered(header, "y")])
        if model == "regression":
            if "y" not in header:
                raise UsageError("regression model needs a 'y' column")
            return RegressionSample(data[:, _numbered(header, "x")], data[:, header.index("y")])
    except InvalidInput as exc:
        raise UsageError(f"{path}: {exc}") from None
    raise UsageError(f"unknown model {model!r}")


def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(v)) for v in r])
    return buf.getvalue()


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"cannot parse number list {text!r}") from None


def _grid(args, n_default):
    if args.grid_min is None and args.grid_max is None:
        return None
    if args.grid_min is None or args.grid_max is None:
        raise UsageError("--grid-min and --grid-max go together")
    if not args.grid_min < args.grid_max:
        raise UsageError("--grid-min must be below --grid-max")
    points = args.points or n_default
    if points < 2:
        raise UsageError("--points must be at least 2")
    return np.linspace(args.grid_min, args.grid_max, points)


# -- subcommands -------------------------------------------------------------


def cmd_gen(args):
    if args.n < 1:
        raise UsageError("--n must be at least 1")
    rng = stream(args.seed)
    fam = args.family
    if not args.sigma2 > 0:
        raise UsageError("--sigma2 must be positive")
    sd = math.sqrt(args.sigma2)
    if fam == "normal":
        y = args.mu + sd * rng.standard_normal(args.n)
        text = _csv_text(["y"], y[:, None])
    elif fam == "gamma":
        if not (args.mu > 0 and args.shape > 0):
            raise UsageError("gamma needs --mu > 0 and --shape > 0")
        y = rng.standard_gamma(args.shape, args.n) * (args.mu / args.shape)
        text = _csv_text(["y"], y[:, None])
    elif fam == "mvn":
        if args.d < 1:
            raise UsageError("--d must be at least 1")
        y = args.mu + sd * rng.standard_normal((args.n, args.d))
        text = _csv_text([f"y{i}" for i in range(1, args.d + 1)], y)
    else:
        if args.q < 1:
            raise UsageError("--q must be at least 1")
        beta = np.array(_floats(args.beta)) if args.beta else np.ones(args.q)
        if beta.size != args.q:
            raise UsageError("--beta must list q coefficients")
        X = np.ones((args.n, args.q))
        if args.q > 1:
            X[:, 1:] = rng.standard_normal((args.n, args.q - 1))
        y = X @ beta + sd * rng.standard_normal(args.n)
        text = _csv_text([f"x{i}" for i in range(1, args.q + 1)] + ["y"], np.column_stack([X, y]))
    _write(args.out, text)
    return EXIT_OK


def _points_per_axis(args):
    if args.points is not None and args.points < 2:
        raise UsageError("--points must be at least 2")
    return args.points


def cmd_verify(args):
    sample = load_sample(args.input, args.model)
    try:
        if args.model == "normal":
            grid = _grid(args, 201)
            if grid is None and args.points is not None:
                grid = default_normal_grid(sample, _points_per_axis(args))
            report = verify_normal(sample, grid, args.mode, args.tolerance)
        elif args.model == "mvn":
            if args.grid_min is not None or args.grid_max is not None:
                raise UsageError("explicit grids are scalar-only; mvn uses its default grid")
            if args.mode == "numeric" and args.seed is None:
                raise UsageError("numeric mvn verification needs --seed")
            grid = default_mvn_grid(sample, _points_per_axis(args))
            report = verify_mvn(sample, grid, args.mode, args.tolerance,
                                draws=args.draws, seed=args.seed)
        else:
            if args.grid_min is not None or args.grid_max is not None:
                raise UsageError("explicit grids are scalar-only; regression uses its default grid")
            grid = default_regression_grid(sample, _points_per_axis(args))
            report = verify_regression(sample, grid, args.mode, args.tolerance)
    except ProflikError as exc:
        _write(args.out, _dump({"model": args.model, "error": type(exc).__name__,
                                "message": str(exc), "pass": False}))
        return EXIT_COMPUTE
    _write(args.out, _dump(report.to_dict()))
    return EXIT_OK if report.passed else EXIT_FAIL


def _default_posterior_grid(sample, points):
    t = flat_prior_posterior_t(sample) if sample.n >= 3 else None
    if t is None:
        raise InvalidInput("default posterior grid needs n >= 3; pass --grid-min/--grid-max")
    df = t.df
    # flat-prior t kernel ratio (1 + x^2/df)^(-(df+1)/2) falls to 1e-9 at x scales
    x = math.sqrt(df * (1e9 ** (2.0 / (df + 1.0)) - 1.0))
    return np.linspace(t.loc - x * t.scale, t.loc + x * t.scale, points)


def cmd_posterior(args):
    sample = load_sample(args.input, "normal")
    if args.prior == "all":
        priors = list(FIGURE_PRIORS)
    else:
        try:
            priors = [MeanPrior.parse(args.prior)]
        except InvalidInput as exc:
            raise UsageError(str(exc)) from None
    if args.gibbs:
        if len(priors) != 1:
            raise UsageError("--gibbs needs a single --prior")
        if args.seed is None:
            raise UsageError("--gibbs needs --seed")
    grid = _grid(args, 4001)
    curves = []
    try:
        if sample.n < 2:
            raise InvalidInput(f"posterior needs n >= 2, got n={sample.n}")
        if grid is None:
            grid = _default_posterior_grid(sample, args.points or 4001)
        for prior in priors:
            c = grid_profile_posterior(sample, prior, grid)
            c.meta["kind"] = "grid"
            curves.append(c)
        if args.gibbs:
            draws = gibbs_profile_posterior(sample, priors[0], args.iters, args.burnin, args.seed)
            if args.draws_out:
                _write(args.draws_out, draws.to_csv())
            centre = sample.mean
            spread = 6.0 * float(np.std(draws.mu))
            edges = np.linspace(centre - spread, centre + spread, args.bins + 1)
            h = summarize_draws(draws, edges)
            h.meta.update(kind="histogram", seed=args.seed, burn_in=args.burnin,
                          iterations=args.iters)
            curves.append(h)
    except ProflikError as exc:
        _write(args.out, _dump({"error": type(exc).__name__, "message": str(exc)}))
        return EXIT_COMPUTE
    _write(args.out, _dump([c.to_dict() for c in curves]))
    return EXIT_OK


def cmd_conjecture(args):
    family = FAMILIES[args.family]()
    ns = [int(v) for v in _floats(args.ns)]
    truth = list(family.default_truth)
    if args.mu is not None:
        truth[0] = args.mu
    if args.nuisance is not None:
        truth[1] = args.nuisance
    try:
        grid_spec = GridSpec(args.half_width, args.points)
    except InvalidInput as exc:
        raise UsageError(str(exc)) from None
    try:
        table = discrepancy_scan(family, truth[0], truth[1], ns, args.reps, args.seed, grid_spec)
    except ProflikError as exc:
        sys.stderr.write(f"conjecture: {type(exc).__name__}: {exc}\n")
        return EXIT_COMPUTE
    _write(args.out, table.to_csv())
    summary = table.summary_dict()
    status = EXIT_OK
    if family.tag == "normal-control":
        ok = all(s["median"] is not None and s["median"] <= NORMAL_CONTROL_TOL
                 for s in summary["summaries"])
        summary["normal_control_pass"] = ok
        status = EXIT_OK if ok else EXIT_FAIL
    if args.summary:
        _write(args.summary, _dump(summary))
    return status


# -- parser -----------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def _seed(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("seed must be an integer") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def _add_grid(p):
    p.add_argument("--grid-min", type=float)
    p.add_argument("--grid-max", type=float)
    p.add_argument("--points", type=int)


def build_parser():
    parser = _Parser(prog="proflik", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="simulate a dataset as CSV")
    p.add_argument("--family", choices=["normal", "gamma", "mvn", "regression"], default="normal")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=_seed, required=True)
    p.add_argument("--mu", type=float, default=0.0)
    p.add_argument("--sigma2", type=float, default=1.0)
    p.add_argument("--shape", type=float, default=1.5, help="gamma shape")
    p.add_argument("--d", type=int, default=2, help="mvn dimension")
    p.add_argument("--q", type=int, default=2, help="regression covariates incl. intercept")
    p.add_argument("--beta", help="comma-separated regression coefficients")
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("verify", help="profile vs Jeffreys-marginal equivalence report")
    p.add_argument("input")
    p.add_argument("--model", choices=["normal", "mvn", "regression"], default="normal")
    p.add_argument("--mode", choices=["analytic", "numeric"], default="analytic")
    p.add_argument("--tolerance", type=float)
    p.add_argument("--seed", type=_seed)
    p.add_argument("--draws", type=int, default=5000)
    _add_grid(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("posterior", help="profile posterior curves for a scalar sample")
    p.add_argument("input")
    p.add_argument("--prior", default="all", help="flat | normal:m0,tau2 | all")
    p.add_argument("--gibbs", action="store_true")
    p.add_argument("--iters", type=int, default=55_000)
    p.add_argument("--burnin", type=int, default=5_000)
    p.add_argument("--seed", type=_seed)
    p.add_argument("--bins", type=int, default=60)
    p.add_argument("--draws-out")
    _add_grid(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_posterior)

    p = sub.add_parser("conjecture", help="discrepancy scan for a shipped family")
    p.add_argument("--family", choices=sorted(FAMILIES), required=True)
    p.add_argument("--ns", default="5,10,20,40,80")
    p.add_argument("--reps", type=int, default=20)
    p.add_argument("--seed", type=_seed, required=True)
    p.add_argument("--mu", type=float, help="true interest value")
    p.add_argument("--nuisance", type=float, help="true nuisance value")
    p.add_argument("--points", type=int, default=41)
    p.add_argument("--half-width", type=float, default=4.0, help="grid half-width in SEs")
    p.add_argument("--out")
    p.add_argument("--summary")
    p.set_defaults(func=cmd_conjecture)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"proflik {args.command}: {exc}\n")
        return EXIT_USAGE
    except InvalidInput as exc:
        sys.stderr.write(f"proflik {args.command}: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
