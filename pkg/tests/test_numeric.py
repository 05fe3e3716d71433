import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, optimize, special, stats

from proflik import closed_forms as cf
from proflik.core import RegressionSample, ScalarSample, VectorSample, scatter_matrix, sum_sq_dev
from proflik.errors import (
    DivergentIntegral,
    DomainEscape,
    EffectiveSampleSizeTooLow,
    InvalidInput,
    NoSamplerAvailable,
    NonConvergence,
    NotPositiveDefinite,
    ToleranceNotMet,
)
from proflik.numeric import (
    POSITIVE,
    NuisanceModel,
    QuadratureSpec,
    fisher_info_nuisance,
    gamma_mean_shape_model,
    integrate_log,
    inverse_gamma_proposal,
    inverse_wishart_proposal,
    jeffreys_log_prior_numeric,
    marginal_mc,
    marginal_numeric,
    maximize_simplex,
    mvn_model,
    normal_model,
    profile_numeric,
    regression_model,
)
from proflik.numeric.families import duplication_matrix

PAIR = ScalarSample([-1.0, 1.0])


def jeffreys_variance(nu):
    return -math.log(nu[0])


def _scalar(seed, n):
    rng = np.random.default_rng(seed)
    return ScalarSample(rng.normal(rng.uniform(-2, 2), rng.uniform(0.3, 3), n))


class TestModel:
    def test_rejects_nuisance_free(self):
        with pytest.raises(InvalidInput):
            NuisanceModel("x", 1, 0, lambda d, i, n: 0.0, ())

    def test_log_cholesky_round_trip(self):
        m = mvn_model(3)
        S = np.array([[2.0, 0.3, -0.1], [0.3, 1.0, 0.2], [-0.1, 0.2, 0.5]])
        np.testing.assert_allclose(m.from_unconstrained(m.to_unconstrained(S)), S, atol=1e-14)
        np.testing.assert_allclose(m.unpack(m.pack(S)), S)

    def test_not_pd_rejected(self):
        with pytest.raises(InvalidInput):
            mvn_model(2).to_unconstrained([[1.0, 2.0], [2.0, 1.0]])

    def test_duplication_matrix(self):
        S = np.array([[1.0, 2.0], [2.0, 3.0]])
        np.testing.assert_array_equal(duplication_matrix(2) @ mvn_model(2).pack(S), S.reshape(-1))


class TestMaximizeSimplex:
    def test_quadratic(self):
        r = maximize_simplex(lambda x: -(x[0] - 1) ** 2 - 3 * (x[1] + 2) ** 2, [0.0, 0.0])
        assert r.converged
        np.testing.assert_allclose(r.x, [1, -2], atol=1e-5)

    def test_constant_returns_init(self):
        x0 = np.array([0.3, -0.7])
        r = maximize_simplex(lambda x: 4.0, x0)
        assert r.converged
        np.testing.assert_array_equal(r.x, x0)
        assert r.fun == 4.0

    def test_unbounded_does_not_converge(self):
        assert not maximize_simplex(lambda x: x[0], [0.0]).converged

    def test_domain_escape(self):
        with pytest.raises(DomainEscape):
            maximize_simplex(lambda x: math.nan, [0.0])

    def test_nonfinite_treated_as_minus_inf(self):
        r = maximize_simplex(lambda x: -x[0] ** 2 if x[0] > -0.1 else math.nan, [0.05])
        assert r.converged
        assert abs(r.x[0]) < 1e-4


class TestProfileNumeric:
    def test_pair_example(self):
        value, nu = profile_numeric(normal_model(), PAIR, [0.0], [2.0])
        assert value == pytest.approx(-2.837877066409345, abs=1e-6)
        assert nu[0] == pytest.approx(1.0, abs=1e-6)

    def test_mvn_example(self):
        rng = np.random.default_rng(42)
        v = VectorSample(rng.standard_normal((4, 2)))
        mu = [0.1, -0.2]
        value, _ = profile_numeric(mvn_model(2), v, mu)
        assert value == pytest.approx(cf.log_profile_mvn(v, mu), abs=1e-6)

    def test_constant_in_nuisance(self):
        m = NuisanceModel("flat", 1, 1, lambda d, i, n: -1.5, (POSITIVE,))
        value, nu = profile_numeric(m, PAIR, [0.0], [3.0])
        assert value == -1.5
        assert nu[0] == pytest.approx(3.0, rel=1e-15)

    def test_value_not_below_init(self):
        s = _scalar(3, 6)
        m = normal_model()
        for init in (0.01, 1.0, 50.0):
            val, _ = profile_numeric(m, s, [0.4], [init])
            assert val >= m.log_density(s, [0.4], [init])

    def test_non_convergence(self):
        m = NuisanceModel("up", 1, 1, lambda d, i, n: math.log(n[0]), (POSITIVE,))
        with pytest.raises(NonConvergence):
            profile_numeric(m, PAIR, [0.0], [1.0])

    @pytest.mark.parametrize("seed", range(8))
    def test_init_invariance(self, seed):
        s = _scalar(seed, 5 + seed)
        mu = s.mean + 0.5
        s2 = sum_sq_dev(s, mu) / s.n
        vals = [profile_numeric(normal_model(), s, [mu], [f * s2])[0] for f in (0.1, 1.0, 10.0)]
        assert max(vals) - min(vals) <= 1e-6

    @pytest.mark.parametrize("seed", range(4))
    def test_gamma_against_scipy(self, seed):
        rng = np.random.default_rng(seed)
        y = rng.gamma(1.5, 2.0 / 1.5, 20)
        mu = float(np.mean(y)) * 1.1

        def negll(log_a):
            a = math.exp(log_a)
            return -float(np.sum(stats.gamma.logpdf(y, a, scale=mu / a)))

        oracle = optimize.minimize_scalar(negll, bracket=(-1, 2), tol=1e-12)
        value, nu = profile_numeric(gamma_mean_shape_model(), ScalarSample(y), [mu])
        assert value == pytest.approx(-oracle.fun, abs=1e-6)
        assert nu[0] == pytest.approx(math.exp(oracle.x), rel=1e-4)


class TestIntegrateLog:
    def test_standard_normal(self):
        r = integrate_log(lambda t: -0.5 * t * t, 0.3)
        assert r.log_value == pytest.approx(0.5 * math.log(2 * math.pi), abs=1e-12)

    def test_far_from_centre(self):
        r = integrate_log(lambda t: -0.5 * (t - 6.0) ** 2 + 700.0, 5.0)
        assert r.log_value == pytest.approx(700 + 0.5 * math.log(2 * math.pi), abs=1e-10)

    def test_bimodal(self):
        def log_f(t):
            return float(np.logaddexp(-0.5 * (t + 3) ** 2, -0.5 * (t - 4) ** 2 / 0.25))
        r = integrate_log(log_f, -3.0)
        exact = math.log(math.sqrt(2 * math.pi) * 1.5)
        assert r.log_value == pytest.approx(exact, abs=1e-9)

    def test_divergent(self):
        with pytest.raises(DivergentIntegral):
            integrate_log(lambda t: -0.5 * math.log1p(t * t), 0.0)

    def test_tolerance_not_met(self):
        # kink at a non-dyadic point slows convergence below the budget
        spec = QuadratureSpec(rtol=1e-15, log_atol=1e-15, max_subdivisions=10)
        with pytest.raises(ToleranceNotMet) as err:
            integrate_log(lambda t: -abs(t - 0.1234567) ** 0.5 - 0.1 * t * t, 0.0, spec)
        assert err.value.achieved > 1e-15

    def test_monotone_error_in_rtol(self):
        def log_f(t):
            return -abs(t - 0.3) - 0.5 * t * t
        errs = [integrate_log(log_f, 0.0, QuadratureSpec(rtol=r, log_atol=1e-300)).log_error
                for r in (1e-4, 5e-5, 2.5e-5, 1.25e-5, 6.25e-6)]
        assert all(b <= a for a, b in zip(errs, errs[1:]))

    def test_spec_validation(self):
        with pytest.raises(InvalidInput):
            QuadratureSpec(rtol=0)
        with pytest.raises(InvalidInput):
            QuadratureSpec(max_subdivisions=9)
        with pytest.raises(InvalidInput):
            QuadratureSpec(transform="probit")


class TestMarginalNumeric:
    def test_pair_example(self):
        v = marginal_numeric(normal_model(), PAIR, [0.0], jeffreys_variance)
        assert v == pytest.approx(-math.log(2 * math.pi), abs=1e-9)

    def test_regression(self):
        rng = np.random.default_rng(8)
        X = np.column_stack([np.ones(15), rng.standard_normal(15)])
        r = RegressionSample(X, X @ [1.0, -0.5] + rng.standard_normal(15))
        beta = [0.9, -0.3]
        assert marginal_numeric(regression_model(2), r, beta, jeffreys_variance) == pytest.approx(
            cf.log_marginal_regression_jeffreys(r, beta), abs=1e-6)

    def test_gamma_against_scipy_quad(self):
        rng = np.random.default_rng(2)
        y = rng.gamma(1.5, 2.0 / 1.5, 12)
        mu = 2.0

        def prior(a):
            return 0.5 * math.log(special.polygamma(1, a) - 1 / a)

        def integrand(a):
            return math.exp(float(np.sum(stats.gamma.logpdf(y, a, scale=mu / a))) + prior(a) + 15)

        oracle, _ = integrate.quad(integrand, 0, np.inf, epsrel=1e-12, limit=200)
        got = marginal_numeric(gamma_mean_shape_model(), ScalarSample(y), [mu],
                               lambda nu: prior(nu[0]))
        assert got == pytest.approx(math.log(oracle) - 15, abs=1e-7)

    def test_improper_integral_divergent(self):
        # flat prior on sigma2 with n = 2 leaves a 1/sigma2 tail
        with pytest.raises(DivergentIntegral):
            marginal_numeric(normal_model(), PAIR, [0.0], lambda nu: 0.0)

    def test_rejects_matrix_nuisance(self):
        with pytest.raises(InvalidInput):
            marginal_numeric(mvn_model(2), VectorSample(np.eye(3)), [0, 0], lambda s: 0.0)

    def test_deterministic(self):
        s = _scalar(1, 9)
        a = marginal_numeric(normal_model(), s, [0.2], jeffreys_variance)
        b = marginal_numeric(normal_model(), s, [0.2], jeffreys_variance)
        assert a == b

    @given(st.integers(2, 40), st.integers(0, 2**32 - 1))
    @settings(max_examples=25, deadline=None)
    def test_oracle_agreement(self, n, seed):
        s = _scalar(seed, n)
        mu = s.mean + np.random.default_rng(seed).normal(0, 1)
        assert abs(profile_numeric(normal_model(), s, [mu])[0] - cf.log_profile_normal(s, mu)) <= 1e-6
        assert abs(marginal_numeric(normal_model(), s, [mu], jeffreys_variance)
                   - cf.log_marginal_normal_jeffreys(s, mu)) <= 1e-6


class TestMarginalMC:
    def test_mvn_example(self):
        rng = np.random.default_rng(17)
        v = VectorSample(rng.standard_normal((4, 2)))
        mu = np.array([0.2, 0.1])
        A = scatter_matrix(v, mu)
        lv, se = marginal_mc(mvn_model(2), v, mu, cf.log_jeffreys_prior_cov,
                             inverse_wishart_proposal(v.n + 2, A), 5000, 1)
        assert abs(lv - cf.log_marginal_mvn_jeffreys(v, mu)) <= 3 * se

    def test_mvn_zero_variance(self):
        # the Jeffreys integrand in Sigma is exactly IW(n, A)
        v = VectorSample(np.random.default_rng(18).standard_normal((7, 2)))
        mu = np.array([0.1, -0.2])
        lv, se = marginal_mc(mvn_model(2), v, mu, cf.log_jeffreys_prior_cov,
                             inverse_wishart_proposal(v.n, scatter_matrix(v, mu)), 1000, 4)
        assert se < 1e-10
        assert lv == pytest.approx(cf.log_marginal_mvn_jeffreys(v, mu), abs=1e-10)

    def test_reported_error_calibrated(self):
        # 200 z-scores: mean has sd 0.07, sd has sd 0.05
        v = VectorSample(np.random.default_rng(19).standard_normal((6, 2)))
        mu = v.mean + 0.2
        A = scatter_matrix(v, mu)
        exact = cf.log_marginal_mvn_jeffreys(v, mu)
        prop = inverse_wishart_proposal(v.n - 1, A)
        z = []
        for seed in range(200):
            lv, se = marginal_mc(mvn_model(2), v, mu, cf.log_jeffreys_prior_cov, prop, 1000, seed)
            z.append((lv - exact) / se)
        assert abs(np.mean(z)) < 0.25
        assert 0.8 < np.std(z) < 1.2

    def test_scalar_against_quadrature(self):
        s = _scalar(6, 8)
        mu = s.mean - 0.3
        S = sum_sq_dev(s, mu)
        lv, se = marginal_mc(normal_model(), s, [mu], jeffreys_variance,
                             inverse_gamma_proposal(s.n / 2 - 0.5, S / 2), 5000, 2)
        quad = marginal_numeric(normal_model(), s, [mu], jeffreys_variance)
        assert 0 < se < 0.1
        assert abs(lv - quad) <= 3 * se

    def test_zero_variance_proposal(self):
        # the Jeffreys integrand in sigma2 is exactly IG(n/2, S/2)
        s = _scalar(7, 10)
        S = sum_sq_dev(s, 0.5)
        lv, se = marginal_mc(normal_model(), s, [0.5], jeffreys_variance,
                             inverse_gamma_proposal(s.n / 2, S / 2), 2000, 3)
        assert se < 1e-10
        assert lv == pytest.approx(cf.log_marginal_normal_jeffreys(s, 0.5), abs=1e-10)

    def test_reproducible(self):
        s = _scalar(8, 6)
        prop = inverse_gamma_proposal(s.n / 2, sum_sq_dev(s, 0.0))
        a = marginal_mc(normal_model(), s, [0.0], jeffreys_variance, prop, 1500, 99)
        b = marginal_mc(normal_model(), s, [0.0], jeffreys_variance, prop, 1500, 99)
        c = marginal_mc(normal_model(), s, [0.0], jeffreys_variance, prop, 1500, 100)
        assert a == b
        assert a != c

    def test_too_few_draws(self):
        with pytest.raises(InvalidInput):
            marginal_mc(normal_model(), PAIR, [0.0], jeffreys_variance,
                        inverse_gamma_proposal(1.0, 1.0), 999, 0)

    def test_low_ess(self):
        # proposal far from where the integrand lives
        s = ScalarSample(np.linspace(-0.01, 0.01, 30))
        with pytest.raises(EffectiveSampleSizeTooLow):
            marginal_mc(normal_model(), s, [0.0], jeffreys_variance,
                        inverse_gamma_proposal(50.0, 500.0), 2000, 0)


class TestFisher:
    def test_normal_analytic(self):
        assert fisher_info_nuisance(normal_model(), [0.0], [1.0])[0, 0] == 0.5
        assert fisher_info_nuisance(normal_model(), [0.0], [2.0])[0, 0] == pytest.approx(1 / 8)

    def test_normal_mc(self):
        info = fisher_info_nuisance(normal_model(), [0.0], [1.0], "monte-carlo", seed=5, reps=100_000)
        assert info[0, 0] == pytest.approx(0.5, rel=0.02)

    def test_gamma_trigamma(self):
        info = fisher_info_nuisance(gamma_mean_shape_model(), [2.0], [1.0])
        assert info[0, 0] == pytest.approx(math.pi ** 2 / 6 - 1, abs=1e-12)
        mc = fisher_info_nuisance(gamma_mean_shape_model(), [2.0], [1.0], "monte-carlo",
                                  seed=6, reps=100_000)
        assert mc[0, 0] == pytest.approx(math.pi ** 2 / 6 - 1, rel=0.02)

    def test_mvn_analytic_against_mc(self):
        Sigma = np.array([[1.5, 0.4], [0.4, 0.8]])
        a = fisher_info_nuisance(mvn_model(2), [0, 0], Sigma)
        mc = fisher_info_nuisance(mvn_model(2), [0, 0], Sigma, "monte-carlo", seed=7, reps=100_000)
        assert np.max(np.abs(mc - a)) <= 0.02 * np.max(np.abs(a))
        np.testing.assert_array_equal(a, a.T)

    def test_identical_points(self):
        m = normal_model()
        a = fisher_info_nuisance(m, [0.0], [1.7], "monte-carlo", seed=3, reps=1000)
        b = fisher_info_nuisance(m, [0.0], np.array([1.7]), "monte-carlo", seed=3, reps=1000)
        np.testing.assert_array_equal(a, b)

    def test_no_sampler(self):
        with pytest.raises(NoSamplerAvailable):
            fisher_info_nuisance(regression_model(1), [0.0], [1.0], "monte-carlo", seed=1)

    def test_mc_needs_seed(self):
        with pytest.raises(InvalidInput):
            fisher_info_nuisance(normal_model(), [0.0], [1.0], "monte-carlo")


class TestJeffreysNumeric:
    def test_normal_differences(self):
        m = normal_model()
        grid = [0.3, 1.0, 2.5, 7.0]
        num = [jeffreys_log_prior_numeric(m, [0.0], [v]) for v in grid]
        ref = [cf.log_jeffreys_prior_variance(v) for v in grid]
        for k in range(1, len(grid)):
            assert num[k] - num[0] == pytest.approx(ref[k] - ref[0], abs=1e-8)

    def test_mvn_differences(self):
        m = mvn_model(2)
        mats = [np.eye(2), np.array([[2.0, 0.5], [0.5, 1.0]]), np.array([[0.3, -0.1], [-0.1, 4.0]])]
        num = [jeffreys_log_prior_numeric(m, [0, 0], S) for S in mats]
        ref = [cf.log_jeffreys_prior_cov(S) for S in mats]
        for k in range(1, len(mats)):
            assert num[k] - num[0] == pytest.approx(ref[k] - ref[0], abs=1e-10)

    def test_gamma_value(self):
        assert jeffreys_log_prior_numeric(gamma_mean_shape_model(), [2.0], [1.0]) == pytest.approx(
            0.5 * math.log(math.pi ** 2 / 6 - 1), abs=1e-12)

    def test_not_positive(self):
        m = NuisanceModel("bad", 1, 1, lambda d, i, n: 0.0, (POSITIVE,),
                          analytic_nuisance_fisher=lambda i, n: [[-1.0]])
        with pytest.raises(NotPositiveDefinite):
            jeffreys_log_prior_numeric(m, [0.0], [1.0])
