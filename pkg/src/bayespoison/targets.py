"""Constructors for the attacker's target posterior.

A target only ever needs to be sampled, so every constructor returns a
seedable sampler plus, when the target belongs to an exact family, a
normalized log-density (required by reverse-KL machinery, which must reject
density-free targets).  The descriptor records how the target was built for
provenance in run outputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import Dataset, Model, RngSeed
from .models.nig import NigParams, nig_logpdf, unpack_params
from .samplers import GaussianApprox, HmcConfig, SampleBatch, sample_nig_exact, sample_posterior

__all__ = [
    "Target",
    "laplace_flip_target",
    "nig_mean_shift_target",
    "nig_params_target",
    "nig_variance_scale_target",
    "response_shift_target",
    "synthetic_refit_target",
    "target_log_ratio",
]


@dataclass(frozen=True)
class Target:
    """An attacker's target distribution over model parameters.

    ``sampler(count, seed)`` is deterministic under a fixed seed.
    ``logdensity`` is a normalized log-density or None for MCMC-backed
    targets.  ``nig_params`` and ``gaussian`` expose the exact family behind
    the target when there is one, which is what lets evaluation pick a
    closed-form KL.
    """

    sampler: Callable[[int, RngSeed], SampleBatch]
    logdensity: Callable[[np.ndarray], float] | None
    descriptor: dict = field(default_factory=dict)
    nig_params: NigParams | None = None
    gaussian: GaussianApprox | None = None
    laplace_source: tuple[Model, Dataset] | None = None


def nig_params_target(params: NigParams, descriptor: dict | None = None) -> Target:
    """Exact target from explicit normal-inverse-gamma parameters."""

    def logdensity(theta: np.ndarray) -> float:
        beta, sigma2 = unpack_params(np.asarray(theta, dtype=float))
        # + log sigma2: density on the unconstrained (beta, log sigma2) scale.
        return nig_logpdf(params, beta, float(sigma2)) + float(np.log(sigma2))

    return Target(
        sampler=lambda count, seed: sample_nig_exact(params, count, seed),
        logdensity=logdensity,
        descriptor=descriptor or {"kind": "nig_params"},
        nig_params=params,
    )


def nig_mean_shift_target(base: NigParams, coord: int, new_value: float) -> Target:
    """Replace one coordinate of the posterior mean, leaving the rest alone."""
    if not 0 <= coord < base.d:
        raise ValueError("coordinate out of range")
    mu = base.mu.copy()
    mu[coord] = float(new_value)
    params = NigParams(mu=mu, lam=base.lam, a=base.a, b=base.b)
    return nig_params_target(
        params,
        {"kind": "nig_mean_shift", "coord": int(coord), "value": float(new_value)},
    )


def nig_variance_scale_target(base: NigParams, coord: int, rho: float) -> Target:
    """Scale the uncertainty of one coefficient by ``rho``.

    The coefficient's Cholesky factor entry is scaled rather than the
    covariance entry itself so the result stays positive definite by
    construction.
    """
    if rho <= 0:
        raise ValueError("rho must be positive")
    if not 0 <= coord < base.d:
        raise ValueError("coordinate out of range")
    sigma = base.scale_matrix()
    chol = np.linalg.cholesky(sigma)
    chol[coord, coord] *= rho
    sigma_a = chol @ chol.T
    lam_a = np.linalg.inv(sigma_a)
    params = NigParams(mu=base.mu, lam=0.5 * (lam_a + lam_a.T), a=base.a, b=base.b)
    return nig_params_target(
        params, {"kind": "nig_variance_scale", "coord": int(coord), "rho": float(rho)}
    )


def laplace_flip_target(approx: GaussianApprox, coord: int) -> Target:
    """Gaussian target equal to a posterior approximation with one mean
    coordinate sign-flipped."""
    flipped = approx.with_flipped_mean(coord)
    return Target(
        sampler=flipped.sample,
        logdensity=flipped.logpdf,
        descriptor={"kind": "laplace_flip", "coord": int(coord)},
        gaussian=flipped,
    )


def _mcmc_target(model: Model, data: Dataset, cfg: HmcConfig, descriptor: dict) -> Target:
    ones = np.ones(data.n)

    def sampler(count: int, seed: RngSeed) -> SampleBatch:
        run_cfg = HmcConfig(
            warmup_steps=cfg.warmup_steps,
            samples=count,
            leapfrog_steps=cfg.leapfrog_steps,
            initial_step_size=cfg.initial_step_size,
            target_accept=cfg.target_accept,
            seed=seed,
            max_divergence_fraction=cfg.max_divergence_fraction,
            warm_start_warmup_fraction=cfg.warm_start_warmup_fraction,
        )
        return sample_posterior(model, data, ones, run_cfg)

    return Target(
        sampler=sampler,
        logdensity=None,
        descriptor=descriptor,
        laplace_source=(model, data),
    )


def synthetic_refit_target(
    model: Model,
    estimates: np.ndarray,
    template: Dataset,
    cfg: HmcConfig,
    seed: RngSeed = RngSeed(0, 0),
) -> Target:
    """Posterior given a synthetic dataset drawn at chosen parameter values.

    A synthetic response is simulated from the model's likelihood at
    ``estimates`` over the template covariates; the target is the posterior
    under that dataset, reachable only through MCMC (no log-density).
    """
    synthetic = model.simulate(template, np.asarray(estimates, dtype=float), seed)
    return _mcmc_target(
        model,
        synthetic,
        cfg,
        {
            "kind": "synthetic_refit",
            "estimates": np.asarray(estimates, dtype=float).tolist(),
            "simulation_seed": seed.to_dict(),
        },
    )


def response_shift_target(
    data: Dataset,
    shift: float,
    mask,
    model: Model,
    cfg: HmcConfig,
) -> Target:
    """Posterior under data whose masked responses are shifted by a constant."""
    mask = np.asarray(mask, dtype=bool).ravel()
    if mask.shape[0] != data.n:
        raise ValueError("mask length does not match the dataset")
    y = data.require_response().copy()
    y[mask] += float(shift)
    shifted = data.with_response(y)
    return _mcmc_target(
        model,
        shifted,
        cfg,
        {"kind": "response_shift", "shift": float(shift), "rows_shifted": int(mask.sum())},
    )


def target_log_ratio(model: Model, target: Target, thetas: np.ndarray) -> np.ndarray:
    """log(prior / target) per sample, as consumed by the reverse-KL gradient.

    Rejects targets without an evaluable log-density; the ratio is undefined
    for MCMC-backed targets.
    """
    if target.logdensity is None:
        raise ValueError(
            "target has no log-density; reverse-KL quantities need an exact target"
        )
    arr = np.atleast_2d(np.asarray(thetas, dtype=float))
    return np.array([model.logprior(t) - target.logdensity(t) for t in arr])
