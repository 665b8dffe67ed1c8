"""Conjugate Bayesian linear regression with a normal-inverse-gamma prior.

This family is closed under row reweighting, so the weighted posterior, the
KL divergence between two members, and the attack objective's gradient and
Hessian all have closed forms.  That makes it both a fast exact backend for
the attacks and the oracle against which the sampling-based estimators are
validated.

Parameterization: ``sigma2 ~ InvGamma(a, b)`` and ``beta | sigma2 ~
N(mu, sigma2 * inv(lam))`` with ``lam`` a precision matrix.  The model's
unconstrained parameter vector is ``(beta, log sigma2)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve, cholesky, solve_triangular
from scipy.special import digamma, gammaln, polygamma

from ..core import Dataset, Model, RngSeed, _weight_values

__all__ = [
    "NigParams",
    "NigLinearModel",
    "beta_marginal_sd",
    "beta_scale_sd",
    "inverse_gamma_kl",
    "nig_exact_gradient",
    "nig_exact_hessian",
    "nig_kl",
    "nig_logpdf",
    "nig_weighted_posterior",
    "expected_row_loglik",
    "pack_params",
    "unpack_params",
]

LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass(frozen=True)
class NigParams:
    """Normal-inverse-gamma parameters (mean, precision, shape, scale)."""

    mu: np.ndarray
    lam: np.ndarray
    a: float
    b: float

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=float).ravel()
        lam = np.asarray(self.lam, dtype=float)
        if lam.shape != (mu.size, mu.size):
            raise ValueError("precision matrix shape does not match mean")
        if np.max(np.abs(lam - lam.T)) > 1e-8 * max(1.0, np.max(np.abs(lam))):
            raise ValueError("precision matrix must be symmetric")
        try:
            np.linalg.cholesky(lam)
        except np.linalg.LinAlgError:
            raise ValueError("precision matrix must be positive definite") from None
        if not (self.a > 0 and self.b > 0):
            raise ValueError("shape and scale must be strictly positive")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "lam", 0.5 * (lam + lam.T))
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))

    @property
    def d(self) -> int:
        return self.mu.size

    def scale_matrix(self) -> np.ndarray:
        """inv(lam): the sigma2-free covariance factor of beta."""
        return cho_solve(cho_factor(self.lam, lower=True), np.eye(self.d))

    def close_to(self, other: "NigParams", tol: float = 1e-10) -> bool:
        return (
            np.allclose(self.mu, other.mu, atol=tol)
            and np.allclose(self.lam, other.lam, atol=tol)
            and abs(self.a - other.a) <= tol
            and abs(self.b - other.b) <= tol
        )

    def to_dict(self) -> dict:
        return {
            "mu": self.mu.tolist(),
            "lam": self.lam.tolist(),
            "a": self.a,
            "b": self.b,
        }


def pack_params(beta: np.ndarray, sigma2) -> np.ndarray:
    """(beta, sigma2) -> unconstrained theta with log-variance last."""
    beta = np.atleast_2d(np.asarray(beta, dtype=float))
    s = np.log(np.atleast_1d(np.asarray(sigma2, dtype=float)))
    out = np.column_stack([beta, s])
    return out[0] if out.shape[0] == 1 and np.ndim(sigma2) == 0 else out


def unpack_params(theta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Unconstrained theta -> (beta, sigma2)."""
    arr = np.atleast_2d(np.asarray(theta, dtype=float))
    beta, sigma2 = arr[:, :-1], np.exp(arr[:, -1])
    if np.ndim(theta) == 1:
        return beta[0], sigma2[0]
    return beta, sigma2


def nig_weighted_posterior(prior: NigParams, data: Dataset, w) -> NigParams:
    """Conjugate update under row weights.

    With ``W = diag(w)``: precision ``lam0 + X'WX``, mean solving the normal
    equations against ``lam0 mu0 + X'Wy``, shape ``a0 + sum(w)/2``, and scale
    ``b0 + (mu0'lam0 mu0 + y'Wy - mu_n'lam_n mu_n)/2``.
    """
    wv = _weight_values(w, data.n)
    if np.min(wv) < -1e-9:
        raise ValueError("weights must be nonnegative")
    x, y = data.x, data.require_response()
    if x.shape[1] != prior.d:
        raise ValueError("design matrix width does not match prior dimension")
    xw = x * wv[:, None]
    lam_n = prior.lam + xw.T @ x
    lam_n = 0.5 * (lam_n + lam_n.T)
    rhs = prior.lam @ prior.mu + xw.T @ y
    try:
        chol = cho_factor(lam_n, lower=True)
    except np.linalg.LinAlgError:  # impossible for w >= 0 and PD prior
        raise RuntimeError("posterior precision lost positive definiteness") from None
    mu_n = cho_solve(chol, rhs)
    a_n = prior.a + 0.5 * float(wv.sum())
    b_n = prior.b + 0.5 * float(
        prior.mu @ prior.lam @ prior.mu + (wv * y) @ y - mu_n @ lam_n @ mu_n
    )
    if b_n <= 0:
        raise RuntimeError("posterior scale must stay positive")
    return NigParams(mu_n, lam_n, a_n, b_n)


def inverse_gamma_kl(a1: float, b1: float, a2: float, b2: float) -> float:
    """KL divergence between inverse-gamma distributions (shape, scale)."""
    return float(
        (a1 - a2) * digamma(a1)
        - gammaln(a1)
        + gammaln(a2)
        + a2 * (np.log(b1) - np.log(b2))
        + a1 * (b2 - b1) / b1
    )


def nig_kl(p: NigParams, q: NigParams) -> float:
    """KL(p || q) via the tower decomposition: the inverse-gamma marginal KL
    plus the expected KL of the conditional Gaussians, where the expectation
    over 1/sigma2 under p is a/b."""
    if p.d != q.d:
        raise ValueError("dimension mismatch")
    kl_ig = inverse_gamma_kl(p.a, p.b, q.a, q.b)
    chol_p = cho_factor(p.lam, lower=True)
    trace = float(np.trace(cho_solve(chol_p, q.lam)))
    diff = q.mu - p.mu
    quad = float(diff @ q.lam @ diff)
    logdet_p = 2.0 * float(np.sum(np.log(np.diag(chol_p[0]))))
    logdet_q = 2.0 * float(np.sum(np.log(np.diag(np.linalg.cholesky(q.lam)))))
    kl_gauss = 0.5 * (trace - p.d + logdet_p - logdet_q + (p.a / p.b) * quad)
    return kl_ig + kl_gauss


def nig_logpdf(params: NigParams, beta: np.ndarray, sigma2: float) -> float:
    """Joint log-density at (beta, sigma2)."""
    beta = np.asarray(beta, dtype=float).ravel()
    if sigma2 <= 0:
        return -np.inf
    d = params.d
    diff = beta - params.mu
    logdet = 2.0 * float(np.sum(np.log(np.diag(np.linalg.cholesky(params.lam)))))
    log_ig = (
        params.a * np.log(params.b)
        - gammaln(params.a)
        - (params.a + 1.0) * np.log(sigma2)
        - params.b / sigma2
    )
    log_gauss = 0.5 * logdet - 0.5 * d * (LOG_2PI + np.log(sigma2)) - diff @ params.lam @ diff / (
        2.0 * sigma2
    )
    return float(log_ig + log_gauss)


def _residual_stats(params: NigParams, data: Dataset):
    x, y = data.x, data.require_response()
    m = y - x @ params.mu
    chol = cho_factor(params.lam, lower=True)
    v = cho_solve(chol, x.T)  # inv(lam) @ x'
    return m, x, v


def expected_row_loglik(params: NigParams, data: Dataset) -> np.ndarray:
    """E[log-likelihood of each row] under the given posterior.

    Uses ``E[1/sigma2] = a/b``, ``E[log sigma2] = log b - psi(a)``, and the
    Gaussian identity ``E[(y_i - x_i beta)^2 / sigma2] = m_i^2 a/b + s_i``
    with ``m = y - X mu`` and ``s_i = x_i inv(lam) x_i'``.
    """
    m, x, v = _residual_stats(params, data)
    s = np.einsum("ij,ji->i", x, v)
    e_log_s2 = np.log(params.b) - digamma(params.a)
    return -0.5 * (LOG_2PI + e_log_s2) - 0.5 * (m**2 * params.a / params.b + s)


def nig_exact_gradient(prior: NigParams, data: Dataset, w, target: NigParams) -> np.ndarray:
    """Exact objective gradient: expected row log-likelihoods under the
    weighted posterior minus those under the target."""
    post = nig_weighted_posterior(prior, data, w)
    return expected_row_loglik(post, data) - expected_row_loglik(target, data)


def nig_exact_hessian(params: NigParams, data: Dataset) -> np.ndarray:
    """Exact covariance of the per-row log-likelihoods under ``params``.

    Conditioning on sigma2 makes the rows jointly Gaussian, so the covariance
    splits into a conditional part (Gaussian fourth-moment identities) and
    the covariance of the conditional means over the inverse-gamma mixing
    distribution.
    """
    m, x, v = _residual_stats(params, data)
    a, b = params.a, params.b
    s_mat = x @ v  # X inv(lam) X'
    m2 = m**2
    cond = 0.5 * s_mat**2 + np.outer(m, m) * s_mat * (a / b)
    mixing = (
        0.25 * polygamma(1, a)
        - (m2[:, None] + m2[None, :]) / (4.0 * b)
        + np.outer(m2, m2) * a / (4.0 * b * b)
    )
    h = cond + mixing
    return 0.5 * (h + h.T)


def beta_marginal_sd(params: NigParams, coord: int) -> float:
    """Marginal posterior sd of one regression coefficient (needs a > 1)."""
    if params.a <= 1:
        raise ValueError("marginal variance requires shape a > 1")
    sigma = params.scale_matrix()
    return float(np.sqrt(params.b / (params.a - 1.0) * sigma[coord, coord]))


def beta_scale_sd(params: NigParams, coord: int) -> float:
    """sqrt of the sigma2-free scale entry inv(lam)[coord, coord]."""
    sigma = params.scale_matrix()
    return float(np.sqrt(sigma[coord, coord]))


class NigLinearModel(Model):
    """Gaussian linear regression whose design matrix is the dataset itself.

    ``theta = (beta, log sigma2)``; the log-prior includes the Jacobian of the
    log-variance transform.  Exposes the conjugate weighted posterior so
    attack backends can skip MCMC entirely.
    """

    def __init__(self, prior: NigParams):
        self.prior = prior

    @property
    def dim(self) -> int:
        return self.prior.d + 1

    @property
    def param_names(self) -> tuple[str, ...]:
        return tuple(f"beta{i}" for i in range(self.prior.d)) + ("log_sigma2",)

    def exact_posterior(self, data: Dataset, w) -> NigParams:
        return nig_weighted_posterior(self.prior, data, w)

    def loglik_rows(self, data: Dataset, theta: np.ndarray) -> np.ndarray:
        beta, sigma2 = unpack_params(np.asarray(theta, dtype=float))
        r = data.require_response() - data.x @ beta
        return -0.5 * (LOG_2PI + np.log(sigma2)) - r**2 / (2.0 * sigma2)

    def loglik_matrix(self, data: Dataset, thetas: np.ndarray) -> np.ndarray:
        thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
        betas, s = thetas[:, :-1], thetas[:, -1]
        r = data.require_response()[None, :] - betas @ data.x.T
        inv_2s2 = 0.5 * np.exp(-s)
        return -0.5 * (LOG_2PI + s)[:, None] - r**2 * inv_2s2[:, None]

    def logprior(self, theta: np.ndarray) -> float:
        beta, sigma2 = unpack_params(np.asarray(theta, dtype=float))
        # + log sigma2 is the Jacobian of sampling on the log scale.
        return nig_logpdf(self.prior, beta, float(sigma2)) + float(np.log(sigma2))

    def grad_logprior(self, theta: np.ndarray) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        beta, sigma2 = unpack_params(theta)
        d = self.prior.d
        diff = beta - self.prior.mu
        lam_diff = self.prior.lam @ diff
        g = np.empty(d + 1)
        g[:d] = -lam_diff / sigma2
        g[d] = (
            -(self.prior.a + 1.0)
            + self.prior.b / sigma2
            - 0.5 * d
            + diff @ lam_diff / (2.0 * sigma2)
            + 1.0
        )
        return g

    def grad_loglik_weighted(self, data: Dataset, w, theta: np.ndarray) -> np.ndarray:
        wv = _weight_values(w, data.n)
        beta, sigma2 = unpack_params(np.asarray(theta, dtype=float))
        r = data.require_response() - data.x @ beta
        g = np.empty(self.dim)
        g[:-1] = data.x.T @ (wv * r) / sigma2
        g[-1] = -0.5 * float(wv.sum()) + float(wv @ r**2) / (2.0 * sigma2)
        return g

    def logjoint_closure(self, data: Dataset, w):
        wv = _weight_values(w, data.n)
        x, y = data.x, data.require_response()
        xtwx = (x * wv[:, None]).T @ x
        xtwy = x.T @ (wv * y)
        ytwy = float((wv * y) @ y)
        sw = float(wv.sum())
        prior = self.prior
        d = prior.d

        def value_and_grad(theta: np.ndarray):
            beta, s = theta[:d], theta[d]
            sigma2 = np.exp(s)
            quad = float(beta @ xtwx @ beta - 2.0 * beta @ xtwy + ytwy)
            ll = -0.5 * sw * (LOG_2PI + s) - quad / (2.0 * sigma2)
            lp = nig_logpdf(prior, beta, sigma2) + s
            diff = beta - prior.mu
            lam_diff = prior.lam @ diff
            grad = np.empty(d + 1)
            grad[:d] = (xtwy - xtwx @ beta - lam_diff) / sigma2
            grad[d] = (
                -0.5 * sw
                + quad / (2.0 * sigma2)
                - (prior.a + 1.0)
                + prior.b / sigma2
                - 0.5 * d
                + diff @ lam_diff / (2.0 * sigma2)
                + 1.0
            )
            return float(ll + lp), grad

        return value_and_grad

    def init_params(self, data: Dataset) -> np.ndarray:
        x, y = data.x, data.require_response()
        beta = np.linalg.solve(x.T @ x + np.eye(x.shape[1]), x.T @ y)
        resid = y - x @ beta
        sigma2 = max(float(resid @ resid) / max(data.n, 2), 1e-6)
        return np.concatenate([beta, [np.log(sigma2)]])

    def simulate(self, data: Dataset, theta: np.ndarray, seed: RngSeed) -> Dataset:
        beta, sigma2 = unpack_params(np.asarray(theta, dtype=float))
        rng = seed.generator()
        y = data.x @ beta + np.sqrt(sigma2) * rng.standard_normal(data.n)
        return data.with_response(y)


def sample_nig_params(params: NigParams, size: int, rng: np.random.Generator) -> np.ndarray:
    """Exact iid draws, returned as unconstrained thetas (beta, log sigma2)."""
    if params.a <= 0:
        raise ValueError("shape must be positive")
    inv_sigma2 = rng.gamma(shape=params.a, scale=1.0 / params.b, size=size)
    sigma2 = 1.0 / inv_sigma2
    chol_lam = cholesky(params.lam, lower=True)
    z = rng.standard_normal((size, params.d))
    # beta = mu + sigma * L^-T z since inv(lam) = L^-T L^-1.
    betas = params.mu + np.sqrt(sigma2)[:, None] * solve_triangular(
        chol_lam, z.T, lower=True, trans="T"
    ).T
    return np.column_stack([betas, np.log(sigma2)])
