"""Gradient backends used by the attack loops.

A backend turns a weight vector into an objective-gradient estimate (plus an
optional Hessian estimate) at some cost in sampling.  The sampling backend
implements the generic pipeline: draw from the weighted posterior (exactly
for the conjugate linear model, by warm-started HMC otherwise), evaluate the
per-row log-likelihood matrix, and reduce columns.  The exact backend uses
the conjugate closed forms and is noise-free, which is what convergence and
optimality tests are run against.

The target-side expectation does not depend on the weights, so target samples
are drawn once per attack run and their column statistics cached; a config
switch restores per-iteration resampling.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .core import Dataset, Model, RngSeed, loglik_matrix
from .estimators import GradientEstimate, HessianEstimate, column_variances, hessian_estimate
from .models.nig import NigLinearModel, expected_row_loglik, nig_exact_hessian
from .samplers import HmcConfig, sample_nig_exact, sample_posterior
from .targets import Target

__all__ = ["ExactConjugateBackend", "IterationStats", "SamplingBackend"]


@dataclass(frozen=True)
class IterationStats:
    grad: GradientEstimate
    hess: HessianEstimate | None = None
    hess_diag: np.ndarray | None = None
    diagnostics: dict | None = None


class ExactConjugateBackend:
    """Noise-free gradients and Hessians from the conjugate closed forms.

    Requires a conjugate linear model and a target that is itself in the same
    family.
    """

    def __init__(self, model: NigLinearModel, data: Dataset, target: Target):
        if not isinstance(model, NigLinearModel):
            raise ValueError("the exact backend needs a conjugate linear model")
        if target.nig_params is None:
            raise ValueError("the exact backend needs a conjugate target")
        self.model = model
        self.data = data
        self.target = target
        self._target_means = expected_row_loglik(target.nig_params, data)

    @property
    def n(self) -> int:
        return self.data.n

    def evaluate(self, w, stream: RngSeed, hessian: str = "none") -> IterationStats:
        post = self.model.exact_posterior(self.data, w)
        g = expected_row_loglik(post, self.data) - self._target_means
        zeros = np.zeros(self.data.n)
        grad = GradientEstimate(g, 1, 1, zeros)
        hess = hess_diag = None
        if hessian in ("diag", "full"):
            h = nig_exact_hessian(post, self.data)
            hess_diag = np.diag(h).copy()
            if hessian == "full":
                hess = HessianEstimate(h)
        elif hessian != "none":
            raise ValueError("hessian must be 'none', 'diag', or 'full'")
        return IterationStats(grad=grad, hess=hess, hess_diag=hess_diag, diagnostics={})


class SamplingBackend:
    """Monte Carlo gradient estimation from posterior and target samples."""

    def __init__(
        self,
        model: Model,
        data: Dataset,
        target: Target,
        p_samples: int = 1000,
        q_samples: int = 1000,
        mcmc: HmcConfig | None = None,
        posterior_sampler: str = "auto",
        resample_target: bool = False,
        hessian_sample_source: str = "posterior",
        target_seed: RngSeed = RngSeed(0, 0),
    ):
        if p_samples < 2 or q_samples < 2:
            raise ValueError("sample counts must be at least 2")
        if posterior_sampler not in ("auto", "exact", "hmc"):
            raise ValueError("posterior_sampler must be 'auto', 'exact', or 'hmc'")
        if hessian_sample_source not in ("posterior", "target"):
            raise ValueError("hessian_sample_source must be 'posterior' or 'target'")
        if posterior_sampler == "exact" and not isinstance(model, NigLinearModel):
            raise ValueError("exact posterior sampling needs a conjugate linear model")
        self.model = model
        self.data = data
        self.target = target
        self.p_samples = int(p_samples)
        self.q_samples = int(q_samples)
        self.mcmc = mcmc or HmcConfig()
        self.resample_target = bool(resample_target)
        self.hessian_sample_source = hessian_sample_source
        self.target_seed = target_seed
        if posterior_sampler == "auto":
            posterior_sampler = "exact" if isinstance(model, NigLinearModel) else "hmc"
        self.posterior_sampler = posterior_sampler
        self._hmc_state = None
        self._target_cache = None  # (col_means, col_vars)
        self._target_hessian_cache = None

    @property
    def n(self) -> int:
        return self.data.n

    def _draw_posterior(self, w, stream: RngSeed):
        if self.posterior_sampler == "exact":
            post = self.model.exact_posterior(self.data, w)
            return sample_nig_exact(post, self.p_samples, stream)
        cfg = replace(self.mcmc, samples=self.p_samples, seed=stream)
        batch = sample_posterior(self.model, self.data, w, cfg, warm_start=self._hmc_state)
        self._hmc_state = batch.warm_start_state
        return batch

    def _target_loglik(self, seed: RngSeed) -> np.ndarray:
        batch = self.target.sampler(self.q_samples, seed)
        return loglik_matrix(self.model, self.data, batch.thetas)

    def _target_stats(self, stream: RngSeed):
        if self.resample_target:
            mat = self._target_loglik(stream)
            return mat.mean(axis=0), mat.var(axis=0, ddof=1)
        if self._target_cache is None:
            mat = self._target_loglik(self.target_seed)
            self._target_cache = (mat.mean(axis=0), mat.var(axis=0, ddof=1))
            if self.hessian_sample_source == "target":
                self._target_hessian_cache = hessian_estimate(mat)
        return self._target_cache

    def reset(self) -> None:
        """Drop warm-start and cache state (fresh chain on the next call)."""
        self._hmc_state = None
        self._target_cache = None
        self._target_hessian_cache = None

    def evaluate(self, w, stream: RngSeed, hessian: str = "none") -> IterationStats:
        if hessian not in ("none", "diag", "full"):
            raise ValueError("hessian must be 'none', 'diag', or 'full'")
        batch = self._draw_posterior(w, stream.child(0))
        mat_w = loglik_matrix(self.model, self.data, batch.thetas)
        mean_w = mat_w.mean(axis=0)
        var_w = mat_w.var(axis=0, ddof=1)
        mean_a, var_a = self._target_stats(stream.child(1))
        grad = GradientEstimate(
            g_hat=mean_w - mean_a,
            p_samples=self.p_samples,
            q_samples=self.q_samples,
            per_coordinate_stderr=np.sqrt(var_w / self.p_samples + var_a / self.q_samples),
        )
        hess = hess_diag = None
        if hessian != "none":
            if self.hessian_sample_source == "target":
                self._target_stats(stream.child(1))
                if self._target_hessian_cache is None:
                    self._target_hessian_cache = hessian_estimate(self._target_loglik(stream.child(1)))
                full = self._target_hessian_cache
                hess_diag = np.diag(full.h_hat).copy()
                hess = full if hessian == "full" else None
            else:
                if hessian == "full":
                    hess = hessian_estimate(mat_w)
                    hess_diag = np.diag(hess.h_hat).copy()
                else:
                    hess_diag = column_variances(mat_w)
        return IterationStats(
            grad=grad, hess=hess, hess_diag=hess_diag, diagnostics=dict(batch.diagnostics)
        )
