"""Sparse linear regression with a horseshoe prior.

Model block: global shrinkage ``tau`` and local shrinkages ``lambda_j`` are
half-Cauchy(1); coefficients are ``N(0, (tau * lambda_j)^2)``; the intercept
is Gaussian; the noise scale is half-Cauchy(1).  Positive quantities are
sampled on log scales with the Jacobians folded into the prior.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import Dataset, Model, RngSeed, _weight_values

__all__ = ["HorseshoeSpec", "HorseshoeModel"]

LOG_2PI = float(np.log(2.0 * np.pi))
LOG_HALF_CAUCHY = float(np.log(2.0 / np.pi))


@dataclass(frozen=True)
class HorseshoeSpec:
    dims: int
    prior_scale_alpha: float = 10.0

    def __post_init__(self):
        if self.dims < 1:
            raise ValueError("dims must be positive")
        if self.prior_scale_alpha <= 0:
            raise ValueError("intercept prior scale must be positive")


def _half_cauchy_log(u: float) -> float:
    # density of C+(1) at exp(u), plus the log-scale Jacobian u
    return LOG_HALF_CAUCHY - np.log1p(np.exp(2.0 * u)) + u


def _half_cauchy_grad(u: float) -> float:
    e2u = np.exp(2.0 * u)
    return 1.0 - 2.0 * e2u / (1.0 + e2u)


class HorseshoeModel(Model):
    """theta = (alpha, beta[0..d-1], log tau, log lambda[0..d-1], log sigma)."""

    def __init__(self, spec: HorseshoeSpec):
        self.spec = spec

    @property
    def dim(self) -> int:
        return 2 * self.spec.dims + 3

    @property
    def param_names(self) -> tuple[str, ...]:
        d = self.spec.dims
        return (
            ("alpha",)
            + tuple(f"beta{i}" for i in range(d))
            + ("log_tau",)
            + tuple(f"log_lambda{i}" for i in range(d))
            + ("log_sigma",)
        )

    def _split(self, theta: np.ndarray):
        d = self.spec.dims
        theta = np.asarray(theta, dtype=float)
        return theta[0], theta[1 : d + 1], theta[d + 1], theta[d + 2 : 2 * d + 2], theta[-1]

    def loglik_rows(self, data: Dataset, theta: np.ndarray) -> np.ndarray:
        alpha, beta, _, _, log_sigma = self._split(theta)
        r = data.require_response() - alpha - data.x @ beta
        sigma2 = np.exp(2.0 * log_sigma)
        return -0.5 * LOG_2PI - log_sigma - r**2 / (2.0 * sigma2)

    def loglik_matrix(self, data: Dataset, thetas: np.ndarray) -> np.ndarray:
        d = self.spec.dims
        thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
        alpha = thetas[:, 0]
        betas = thetas[:, 1 : d + 1]
        log_sigma = thetas[:, -1]
        r = data.require_response()[None, :] - alpha[:, None] - betas @ data.x.T
        inv_2s2 = 0.5 * np.exp(-2.0 * log_sigma)
        return (-0.5 * LOG_2PI - log_sigma)[:, None] - r**2 * inv_2s2[:, None]

    def logprior(self, theta: np.ndarray) -> float:
        alpha, beta, log_tau, log_lam, log_sigma = self._split(theta)
        sa2 = self.spec.prior_scale_alpha**2
        lp = -0.5 * (LOG_2PI + np.log(sa2)) - alpha**2 / (2.0 * sa2)
        scale = log_tau + log_lam
        lp += np.sum(-0.5 * LOG_2PI - scale - beta**2 * np.exp(-2.0 * scale) / 2.0)
        lp += _half_cauchy_log(log_tau)
        lp += float(np.sum([_half_cauchy_log(v) for v in log_lam]))
        lp += _half_cauchy_log(log_sigma)
        return float(lp)

    def grad_logprior(self, theta: np.ndarray) -> np.ndarray:
        d = self.spec.dims
        alpha, beta, log_tau, log_lam, log_sigma = self._split(theta)
        g = np.zeros(self.dim)
        g[0] = -alpha / self.spec.prior_scale_alpha**2
        inv_scale2 = np.exp(-2.0 * (log_tau + log_lam))
        g[1 : d + 1] = -beta * inv_scale2
        shrink = -1.0 + beta**2 * inv_scale2
        g[d + 1] = float(np.sum(shrink)) + _half_cauchy_grad(log_tau)
        g[d + 2 : 2 * d + 2] = shrink + np.array([_half_cauchy_grad(v) for v in log_lam])
        g[-1] = _half_cauchy_grad(log_sigma)
        return g

    def grad_loglik_weighted(self, data: Dataset, w, theta: np.ndarray) -> np.ndarray:
        d = self.spec.dims
        wv = _weight_values(w, data.n)
        alpha, beta, _, _, log_sigma = self._split(theta)
        sigma2 = np.exp(2.0 * log_sigma)
        r = data.require_response() - alpha - data.x @ beta
        g = np.zeros(self.dim)
        g[0] = float(wv @ r) / sigma2
        g[1 : d + 1] = data.x.T @ (wv * r) / sigma2
        g[-1] = float(wv @ (-1.0 + r**2 / sigma2))
        return g

    def init_params(self, data: Dataset) -> np.ndarray:
        theta = np.zeros(self.dim)
        y = data.require_response()
        theta[0] = float(np.mean(y))
        theta[-1] = float(np.log(max(np.std(y), 1e-3)))
        return theta

    def simulate(self, data: Dataset, theta: np.ndarray, seed: RngSeed) -> Dataset:
        alpha, beta, _, _, log_sigma = self._split(theta)
        rng = seed.generator()
        y = alpha + data.x @ beta + np.exp(log_sigma) * rng.standard_normal(data.n)
        return data.with_response(y)
