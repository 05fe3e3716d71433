"""Regenerate the pinned pilot fixtures.

    python3 tests/fixtures/make_fixtures.py

Writes ``gamma_scan_pilot.csv`` (reference discrepancy table) and
``ks_pilot.json`` (Kolmogorov-Smirnov statistics of flat-prior Gibbs chains
on the shipped n = 10 dataset).  Tests compare against these files, so
rerun only after an intentional numerical change.
"""

import json
from pathlib import Path

from scipy import stats

from proflik.cli import fixture_path, load_sample
from proflik.closed_forms import flat_prior_posterior_t
from proflik.conjecture import discrepancy_scan, gamma_mean_shape_family
from proflik.posterior import MeanPrior, gibbs_profile_posterior

HERE = Path(__file__).parent

GAMMA_SCAN = {"interest": 2.0, "nuisance": 1.5, "ns": [5, 10, 20, 40, 80],
              "replicates": 10, "master_seed": 31337}
KS_SEEDS = list(range(1, 11))


def gamma_scan():
    c = GAMMA_SCAN
    return discrepancy_scan(gamma_mean_shape_family(), c["interest"], c["nuisance"], c["ns"],
                            c["replicates"], c["master_seed"])


def ks_statistics():
    sample = load_sample(fixture_path(), "normal")
    t = flat_prior_posterior_t(sample)
    out = []
    for seed in KS_SEEDS:
        draws = gibbs_profile_posterior(sample, MeanPrior.flat(), seed=seed)
        out.append(float(stats.kstest(draws.mu, t.cdf).statistic))
    return out


def main():
    table = gamma_scan()
    (HERE / "gamma_scan_pilot.csv").write_text(table.to_csv())
    (HERE / "gamma_scan_pilot.json").write_text(
        json.dumps({"config": GAMMA_SCAN, **table.summary_dict()}, indent=2) + "\n")
    ks = {"seeds": KS_SEEDS, "iterations": 55_000, "burn_in": 5_000, "threshold": 0.015,
          "statistics": ks_statistics()}
    (HERE / "ks_pilot.json").write_text(json.dumps(ks, indent=2) + "\n")


if __name__ == "__main__":
    main()
