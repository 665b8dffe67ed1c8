import numpy as np
import pytest
from scipy import optimize

from bayespoison import (
    Dataset,
    GaussianApprox,
    HmcConfig,
    LogisticModel,
    Model,
    NigLinearModel,
    NigParams,
    OptimizationError,
    RngSeed,
    SaddlePointError,
    SamplerHealthError,
    gen_synthetic_logistic,
    laplace_approx,
    sample_nig_exact,
    sample_posterior,
)
from bayespoison.samplers import HmcState
from conftest import small_nig_instance


class GaussianToyModel(Model):
    """Data-free model whose posterior is exactly the prior Gaussian."""

    def __init__(self, mean, cov):
        self.approx = GaussianApprox(mean, cov)
        self._prec = np.linalg.inv(self.approx.cov)

    @property
    def dim(self):
        return self.approx.d

    def loglik_rows(self, data, theta):
        return np.zeros(data.n)

    def logprior(self, theta):
        return self.approx.logpdf(theta)

    def grad_logprior(self, theta):
        return -self._prec @ (np.asarray(theta, dtype=float) - self.approx.mean)

    def grad_loglik_weighted(self, data, w, theta):
        return np.zeros(self.dim)

    def init_params(self, data):
        return np.zeros(self.dim)


def _dummy_data(n=3):
    return Dataset(np.zeros((n, 1)), np.zeros(n))


class TestExactNigSampler:
    def setup_method(self):
        self.params = NigParams(
            mu=[0.5, -0.3], lam=[[3.0, 0.4], [0.4, 2.0]], a=4.0, b=3.0
        )

    def test_beta_mean(self):
        batch = sample_nig_exact(self.params, 100_000, RngSeed(1))
        betas = batch.thetas[:, :2]
        stderr = betas.std(axis=0, ddof=1) / np.sqrt(100_000)
        assert np.all(np.abs(betas.mean(axis=0) - self.params.mu) <= 4 * stderr)

    def test_precision_mean(self):
        batch = sample_nig_exact(self.params, 100_000, RngSeed(2))
        inv_s2 = np.exp(-batch.thetas[:, -1])
        stderr = inv_s2.std(ddof=1) / np.sqrt(100_000)
        want = self.params.a / self.params.b
        assert abs(inv_s2.mean() - want) <= 4 * stderr

    def test_beta_covariance(self):
        batch = sample_nig_exact(self.params, 100_000, RngSeed(3))
        cov = np.cov(batch.thetas[:, :2], rowvar=False)
        want = self.params.b / (self.params.a - 1.0) * np.linalg.inv(self.params.lam)
        np.testing.assert_allclose(cov, want, rtol=0.10)

    def test_bit_identical_under_fixed_seed(self):
        a = sample_nig_exact(self.params, 50, RngSeed(9, 4))
        b = sample_nig_exact(self.params, 50, RngSeed(9, 4))
        np.testing.assert_array_equal(a.thetas, b.thetas)


class TestHmc:
    def test_standard_normal_moments(self):
        model = GaussianToyModel(np.zeros(2), np.eye(2))
        cfg = HmcConfig(warmup_steps=400, samples=4000, leapfrog_steps=16, seed=RngSeed(4))
        batch = sample_posterior(model, _dummy_data(), np.zeros(3), cfg)
        assert np.all(np.abs(batch.thetas.mean(axis=0)) <= 4.0 / np.sqrt(4000))
        np.testing.assert_allclose(batch.thetas.var(axis=0), 1.0, rtol=0.10)

    def test_correlated_gaussian_acceptance_and_moments(self):
        cov = np.array([[1.0, 0.8], [0.8, 2.0]])
        mean = np.array([1.0, -2.0])
        model = GaussianToyModel(mean, cov)
        cfg = HmcConfig(warmup_steps=500, samples=6000, leapfrog_steps=16, seed=RngSeed(5))
        batch = sample_posterior(model, _dummy_data(), np.zeros(3), cfg)
        assert cfg.target_accept - 0.15 <= batch.accept_rate <= 1.0
        stderr = batch.thetas.std(axis=0, ddof=1) / np.sqrt(6000)
        # Correlated draws: allow a generous autocorrelation factor.
        assert np.all(np.abs(batch.thetas.mean(axis=0) - mean) <= 4 * 5 * stderr)
        np.testing.assert_allclose(np.cov(batch.thetas, rowvar=False), cov, rtol=0.2)

    def test_zero_weights_target_prior(self):
        data = gen_synthetic_logistic(100, coefs=[2.0, -2.0], seed=RngSeed(6))
        model = LogisticModel(dim=2, prior_scale=1.0)
        cfg = HmcConfig(warmup_steps=400, samples=5000, leapfrog_steps=16, seed=RngSeed(7))
        batch = sample_posterior(model, data, np.zeros(100), cfg)
        assert np.all(np.abs(batch.thetas.mean(axis=0)) < 0.1)
        np.testing.assert_allclose(batch.thetas.var(axis=0), 1.0, rtol=0.15)

    def test_agrees_with_exact_conjugate_sampler(self):
        data, prior, model, base = small_nig_instance(n=60, seed=41)
        cfg = HmcConfig(warmup_steps=600, samples=6000, leapfrog_steps=24, seed=RngSeed(8))
        hmc = sample_posterior(model, data, np.ones(60), cfg)
        exact = sample_nig_exact(base, 50_000, RngSeed(9))
        se = exact.thetas.std(axis=0, ddof=1) / np.sqrt(6000)
        diff = np.abs(hmc.thetas.mean(axis=0) - exact.thetas.mean(axis=0))
        assert np.all(diff <= 4 * 5 * se)

    def test_warm_start_statistically_indistinguishable(self):
        data, prior, model, base = small_nig_instance(n=60, seed=42)
        cfg = HmcConfig(warmup_steps=800, samples=4000, leapfrog_steps=24, seed=RngSeed(10))
        cold = sample_posterior(model, data, np.ones(60), cfg)
        warm = sample_posterior(
            model, data, np.ones(60), cfg, warm_start=cold.warm_start_state
        )
        assert warm.diagnostics["warmup_steps"] == int(round(0.25 * 800))
        se_cold = cold.thetas.std(axis=0, ddof=1) / np.sqrt(4000)
        se_warm = warm.thetas.std(axis=0, ddof=1) / np.sqrt(4000)
        gap = np.abs(cold.thetas.mean(axis=0) - warm.thetas.mean(axis=0))
        assert np.all(gap <= 4 * 5 * (se_cold + se_warm))

    def test_divergence_health_error(self):
        model = GaussianToyModel(np.zeros(2), np.eye(2))
        state = HmcState(position=np.zeros(2), step_size=1e6, inv_mass=np.ones(2))
        cfg = HmcConfig(
            warmup_steps=4, samples=50, leapfrog_steps=8, seed=RngSeed(11),
            warm_start_warmup_fraction=0.25,
        )
        with pytest.raises(SamplerHealthError) as err:
            sample_posterior(model, _dummy_data(), np.zeros(3), cfg, warm_start=state)
        assert "divergence_fraction" in err.value.diagnostics

    def test_weights_must_be_nonnegative(self):
        model = GaussianToyModel(np.zeros(1), np.eye(1))
        with pytest.raises(ValueError):
            sample_posterior(model, _dummy_data(), np.array([-1.0, 0.0, 0.0]), HmcConfig())


class TestLaplace:
    def test_gaussian_recovered_exactly(self):
        cov = np.array([[2.0, 0.5], [0.5, 1.0]])
        model = GaussianToyModel(np.array([0.3, -0.7]), cov)
        approx = laplace_approx(model, _dummy_data(), np.zeros(3))
        np.testing.assert_allclose(approx.mean, [0.3, -0.7], atol=1e-7)
        np.testing.assert_allclose(approx.cov, cov, atol=1e-5)

    def test_zero_weights_recover_logistic_prior(self):
        data = gen_synthetic_logistic(50, coefs=[1.0, 1.0], seed=RngSeed(12))
        model = LogisticModel(dim=2, prior_scale=3.0)
        approx = laplace_approx(model, data, np.zeros(50))
        np.testing.assert_allclose(approx.mean, 0.0, atol=1e-8)
        np.testing.assert_allclose(approx.cov, 9.0 * np.eye(2), atol=1e-4)

    def test_mode_matches_independent_optimizer(self):
        data = gen_synthetic_logistic(120, coefs=[1.0, -0.5, 0.25], seed=RngSeed(13))
        model = LogisticModel(dim=3, prior_scale=10.0)
        w = np.ones(120)
        approx = laplace_approx(model, data, w)
        value_and_grad = model.logjoint_closure(data, w)
        res = optimize.minimize(
            lambda t: -value_and_grad(t)[0],
            np.zeros(3),
            jac=lambda t: -value_and_grad(t)[1],
            method="BFGS",
            options={"gtol": 1e-10},
        )
        np.testing.assert_allclose(approx.mean, res.x, atol=1e-6)

    def test_covariance_is_spd(self):
        data, prior, model, base = small_nig_instance(n=40, seed=44)
        approx = laplace_approx(model, data, np.ones(40))
        np.linalg.cholesky(approx.cov)  # raises if not PD

    def test_saddle_point_error(self):
        class SaddleModel(GaussianToyModel):
            def logprior(self, theta):
                return float(theta[0] ** 2 - theta[1] ** 2)

            def grad_logprior(self, theta):
                return np.array([2.0 * theta[0], -2.0 * theta[1]])

        model = SaddleModel(np.zeros(2), np.eye(2))
        with pytest.raises(SaddlePointError):
            laplace_approx(model, _dummy_data(), np.zeros(3), init=np.zeros(2))

    def test_non_convergence_error_carries_iterate(self):
        class RampModel(GaussianToyModel):
            def logprior(self, theta):
                return float(theta[0])  # unbounded above, no mode

            def grad_logprior(self, theta):
                return np.array([1.0, 0.0])

        model = RampModel(np.zeros(2), np.eye(2))
        with pytest.raises(OptimizationError) as err:
            laplace_approx(model, _dummy_data(), np.zeros(3), max_iters=5)
        assert err.value.last_iterate is not None


class TestGaussianApprox:
    def test_requires_pd_covariance(self):
        with pytest.raises(ValueError):
            GaussianApprox(np.zeros(2), np.array([[1.0, 2.0], [2.0, 1.0]]))

    def test_sampler_reproducible_and_calibrated(self):
        g = GaussianApprox([1.0, -1.0], [[1.0, 0.3], [0.3, 0.5]])
        a = g.sample(40_000, RngSeed(14))
        b = g.sample(40_000, RngSeed(14))
        np.testing.assert_array_equal(a.thetas, b.thetas)
        np.testing.assert_allclose(a.thetas.mean(axis=0), g.mean, atol=0.02)
        np.testing.assert_allclose(np.cov(a.thetas, rowvar=False), g.cov, rtol=0.05)

    def test_logpdf_matches_scipy(self):
        from scipy import stats

        g = GaussianApprox([0.5, 0.0], [[2.0, 0.4], [0.4, 1.0]])
        x = np.array([0.1, -0.2])
        want = stats.multivariate_normal(g.mean, g.cov).logpdf(x)
        np.testing.assert_allclose(g.logpdf(x), want, atol=1e-12)


class TestSampleCountValidation:
    def test_exact_sampler_rejects_nonpositive_count(self):
        from bayespoison import NigParams, sample_nig_exact

        params = NigParams(np.zeros(1), np.eye(1), 2.0, 2.0)
        with pytest.raises(ValueError):
            sample_nig_exact(params, 0, RngSeed(1))
