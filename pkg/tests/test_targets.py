import numpy as np
import pytest

from bayespoison import (
    GaussianApprox,
    HmcConfig,
    LogisticModel,
    RngSeed,
    StudentTPriorRegression,
    gen_two_group_regression,
    laplace_approx,
    laplace_flip_target,
    nig_exact_gradient,
    nig_mean_shift_target,
    nig_variance_scale_target,
    response_shift_target,
    synthetic_refit_target,
    target_log_ratio,
)
from bayespoison.models.nig import pack_params

from conftest import small_nig_instance


class TestMeanShiftTarget:
    def test_no_shift_equals_base(self, linreg_instance):
        inst = linreg_instance
        t = nig_mean_shift_target(inst.base, 1, float(inst.base.mu[1]))
        assert t.nig_params.close_to(inst.base)
        g = nig_exact_gradient(inst.prior, inst.data, np.ones(inst.data.n), t.nig_params)
        np.testing.assert_allclose(g, 0.0, atol=1e-12)

    def test_slope_zeroing_setup(self, linreg_instance):
        t = linreg_instance.target
        assert t.nig_params.mu[1] == 0.0
        assert t.nig_params.mu[0] == linreg_instance.base.mu[0]
        assert t.descriptor["kind"] == "nig_mean_shift"

    def test_sampler_moments_match_shifted_mean(self, linreg_instance):
        t = linreg_instance.target
        batch = t.sampler(100_000, RngSeed(50))
        betas = batch.thetas[:, :2]
        stderr = betas.std(axis=0, ddof=1) / np.sqrt(100_000)
        assert np.all(np.abs(betas.mean(axis=0) - t.nig_params.mu) <= 4 * stderr)

    def test_out_of_range_coordinate(self, linreg_instance):
        with pytest.raises(ValueError):
            nig_mean_shift_target(linreg_instance.base, 5, 0.0)


class TestVarianceScaleTarget:
    def test_unit_factor_is_identity(self, linreg_instance):
        t = nig_variance_scale_target(linreg_instance.base, 1, 1.0)
        assert t.nig_params.close_to(linreg_instance.base, tol=1e-8)

    @pytest.mark.parametrize("rho", [0.1, 10.0])
    def test_scaling_factors_stay_spd(self, rho, linreg_instance):
        rng = np.random.default_rng(51)
        for _ in range(20):
            d = int(rng.integers(1, 5))
            a = rng.standard_normal((d, d))
            from bayespoison import NigParams

            base = NigParams(rng.standard_normal(d), a @ a.T + d * np.eye(d), 3.0, 2.0)
            t = nig_variance_scale_target(base, int(rng.integers(d)), rho)
            np.linalg.cholesky(t.nig_params.lam)  # raises if not PD

    @pytest.mark.parametrize("rho", [0.1, 10.0])
    def test_target_scale_moves_in_the_right_direction(self, rho, linreg_instance):
        inst = linreg_instance
        t = nig_variance_scale_target(inst.base, 1, rho)
        before = inst.base.scale_matrix()[1, 1]
        after = t.nig_params.scale_matrix()[1, 1]
        if rho > 1:
            assert after > before
        else:
            assert after < before

    def test_rejects_nonpositive_rho(self, linreg_instance):
        with pytest.raises(ValueError):
            nig_variance_scale_target(linreg_instance.base, 1, 0.0)


class TestLaplaceFlipTarget:
    def test_zero_mean_flip_is_identity(self):
        approx = GaussianApprox([0.0, 1.0], np.eye(2))
        t = laplace_flip_target(approx, 0)
        np.testing.assert_array_equal(t.gaussian.mean, [0.0, 1.0])

    def test_flip_negates_coordinate(self):
        approx = GaussianApprox([0.5, 1.0], [[1.0, 0.2], [0.2, 2.0]])
        t = laplace_flip_target(approx, 1)
        np.testing.assert_array_equal(t.gaussian.mean, [0.5, -1.0])
        np.testing.assert_array_equal(t.gaussian.cov, approx.cov)
        assert t.logdensity is not None

    def test_sampler_mean_matches_flipped(self):
        approx = GaussianApprox([2.0, -1.0], [[1.0, 0.0], [0.0, 1.0]])
        t = laplace_flip_target(approx, 0)
        batch = t.sampler(50_000, RngSeed(52))
        np.testing.assert_allclose(batch.thetas.mean(axis=0), [-2.0, -1.0], atol=0.03)


class TestSyntheticRefitTarget:
    def test_zero_noise_estimates_land_on_plane(self, linreg_instance):
        inst = linreg_instance
        estimates = pack_params(np.array([0.4, 0.0]), 1e-30)
        synthetic = inst.model.simulate(inst.data, estimates, RngSeed(53))
        resid = synthetic.y - 0.4 * synthetic.x[:, 0]
        np.testing.assert_allclose(resid, 0.0, atol=1e-12)

    def test_target_mean_of_zeroed_coordinate_near_zero(self, linreg_instance):
        inst = linreg_instance
        estimates = pack_params(np.array([float(inst.base.mu[0]), 0.0]), 0.25)
        cfg = HmcConfig(warmup_steps=300, samples=400, leapfrog_steps=16)
        t = synthetic_refit_target(inst.model, estimates, inst.data, cfg, seed=RngSeed(54))
        assert t.logdensity is None
        batch = t.sampler(1500, RngSeed(55))
        slope = batch.thetas[:, 1]
        assert abs(slope.mean()) <= 4 * slope.std(ddof=1)


class TestResponseShiftTarget:
    def _setup(self, shift, n=400, seed=56):
        data = gen_two_group_regression(
            n=n, beta1=-2.0, noise_sd=5.0, outlier_sd=5.0, outlier_frac=0.0, seed=RngSeed(seed)
        )
        model = StudentTPriorRegression()
        mask = data.x[:, 0] == 1.0
        cfg = HmcConfig(warmup_steps=300, samples=400, leapfrog_steps=16)
        return data, model, response_shift_target(data, shift, mask, model, cfg)

    def test_zero_shift_matches_untainted_posterior(self):
        data, model, t = self._setup(0.0)
        assert t.descriptor["rows_shifted"] > 0
        batch = t.sampler(1200, RngSeed(57))
        x, y = data.x[:, 0], data.y
        ols = y[x == 1].mean() - y[x == 0].mean()
        sd = batch.thetas[:, 1].std(ddof=1)
        assert abs(batch.thetas[:, 1].mean() - ols) <= 4 * sd

    def test_effect_increases_with_shift(self):
        means = []
        for shift in (100.0, 10_000.0):
            _, _, t = self._setup(shift)
            batch = t.sampler(800, RngSeed(58))
            means.append(batch.thetas[:, 1].mean())
        assert means[1] > means[0] > 0.0

    def test_mask_length_checked(self, linreg_instance):
        inst = linreg_instance
        with pytest.raises(ValueError):
            response_shift_target(
                inst.data, 1.0, np.ones(3, dtype=bool), inst.model, HmcConfig()
            )


class TestTargetContracts:
    def test_exact_targets_reproducible(self, linreg_instance):
        t = linreg_instance.target
        a = t.sampler(100, RngSeed(59, 3))
        b = t.sampler(100, RngSeed(59, 3))
        np.testing.assert_array_equal(a.thetas, b.thetas)

    def test_mcmc_target_reproducible(self):
        data = gen_two_group_regression(
            n=150, beta1=-2.0, noise_sd=5.0, outlier_frac=0.0, seed=RngSeed(60)
        )
        model = StudentTPriorRegression()
        cfg = HmcConfig(warmup_steps=150, samples=100, leapfrog_steps=12)
        t = response_shift_target(data, 10.0, data.x[:, 0] == 1.0, model, cfg)
        a = t.sampler(100, RngSeed(61))
        b = t.sampler(100, RngSeed(61))
        np.testing.assert_array_equal(a.thetas, b.thetas)

    def test_mcmc_targets_reject_reverse_kl(self):
        data = gen_two_group_regression(
            n=100, beta1=-2.0, noise_sd=5.0, outlier_frac=0.0, seed=RngSeed(62)
        )
        model = StudentTPriorRegression()
        t = response_shift_target(data, 10.0, data.x[:, 0] == 1.0, model, HmcConfig())
        assert t.logdensity is None
        with pytest.raises(ValueError, match="log-density"):
            target_log_ratio(model, t, np.zeros((1, 3)))

    def test_logdensity_consistent_with_logratio(self, linreg_instance):
        inst = linreg_instance
        thetas = inst.target.sampler(5, RngSeed(63)).thetas
        ratios = target_log_ratio(inst.model, inst.target, thetas)
        for theta, ratio in zip(thetas, ratios):
            want = inst.model.logprior(theta) - inst.target.logdensity(theta)
            np.testing.assert_allclose(ratio, want, atol=1e-12)
