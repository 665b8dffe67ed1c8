"""Sampling-based estimates of the attack objective's derivatives.

The objective is the forward KL divergence from the attacker's target to the
weighted posterior.  Its gradient is the difference of expected per-row
log-likelihoods under the two distributions, and its Hessian is the
covariance of the per-row log-likelihoods under the weighted posterior, so
both reduce to column statistics of log-likelihood matrices (samples in rows,
data rows in columns).  All functions are deterministic given their inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import _weight_values

__all__ = [
    "GradientEstimate",
    "HessianEstimate",
    "column_variances",
    "forward_kl_gradient",
    "hessian_estimate",
    "reverse_kl_gradient",
    "taylor_decrease",
]


@dataclass(frozen=True)
class GradientEstimate:
    """Unbiased gradient estimate with its Monte Carlo noise level.

    ``per_coordinate_stderr`` combines the sample variances of both column
    means; a side with a single sample contributes zero variance.
    """

    g_hat: np.ndarray
    p_samples: int
    q_samples: int
    per_coordinate_stderr: np.ndarray

    def __post_init__(self):
        if self.p_samples < 1 or self.q_samples < 1:
            raise ValueError("sample counts must be at least 1")
        if not np.all(np.isfinite(self.g_hat)):
            raise ValueError("gradient estimate contains non-finite entries")


@dataclass(frozen=True)
class HessianEstimate:
    """Sample covariance of per-row log-likelihoods; symmetric PSD."""

    h_hat: np.ndarray

    def __post_init__(self):
        h = np.asarray(self.h_hat, dtype=float)
        if h.ndim != 2 or h.shape[0] != h.shape[1]:
            raise ValueError("Hessian estimate must be square")
        if np.max(np.abs(h - h.T)) > 1e-10:
            raise ValueError("Hessian estimate must be symmetric")
        object.__setattr__(self, "h_hat", h)

    def regularized(self, scale: float = 1e-8) -> np.ndarray:
        """Add a small ridge so downstream solvers tolerate singular samples."""
        n = self.h_hat.shape[0]
        eps = scale * max(1.0, float(np.trace(self.h_hat)) / n)
        return self.h_hat + eps * np.eye(n)


def _column_mean_var(mat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mean = mat.mean(axis=0)
    if mat.shape[0] < 2:
        return mean, np.zeros(mat.shape[1])
    return mean, mat.var(axis=0, ddof=1)


def forward_kl_gradient(loglik_w: np.ndarray, loglik_a: np.ndarray) -> GradientEstimate:
    """Gradient estimate from posterior samples (P x n) and target samples (Q x n):
    the difference of column means."""
    loglik_w = np.atleast_2d(np.asarray(loglik_w, dtype=float))
    loglik_a = np.atleast_2d(np.asarray(loglik_a, dtype=float))
    if loglik_w.shape[1] != loglik_a.shape[1]:
        raise ValueError("log-likelihood matrices disagree on the number of data rows")
    mean_w, var_w = _column_mean_var(loglik_w)
    mean_a, var_a = _column_mean_var(loglik_a)
    p, q = loglik_w.shape[0], loglik_a.shape[0]
    stderr = np.sqrt(var_w / p + var_a / q)
    return GradientEstimate(mean_w - mean_a, p, q, stderr)


def hessian_estimate(loglik_w: np.ndarray) -> HessianEstimate:
    """Unbiased sample covariance (divisor P - 1) of the matrix rows."""
    mat = np.atleast_2d(np.asarray(loglik_w, dtype=float))
    p = mat.shape[0]
    if p < 2:
        raise ValueError("Hessian estimation needs at least 2 samples")
    centered = mat - mat.mean(axis=0)
    h = centered.T @ centered / (p - 1)
    return HessianEstimate(0.5 * (h + h.T))


def column_variances(loglik_w: np.ndarray) -> np.ndarray:
    """Diagonal of the sample covariance without forming the n x n matrix."""
    mat = np.atleast_2d(np.asarray(loglik_w, dtype=float))
    if mat.shape[0] < 2:
        raise ValueError("variance estimation needs at least 2 samples")
    return mat.var(axis=0, ddof=1)


def reverse_kl_gradient(loglik_w: np.ndarray, logratio: np.ndarray, w) -> np.ndarray:
    """Monte Carlo gradient of the reverse KL divergence in the weights.

    ``logratio`` holds log(prior / target) per posterior sample; the estimate
    is ``-mean(f) * mean(r) + mean(r * f) + cov(f, f @ w)`` column-wise, where
    f is the log-likelihood matrix.  Requires a target with an evaluable,
    normalized log-density (the ratio is meaningless otherwise).
    """
    mat = np.atleast_2d(np.asarray(loglik_w, dtype=float))
    r = np.asarray(logratio, dtype=float).ravel()
    p = mat.shape[0]
    if r.shape[0] != p:
        raise ValueError("logratio length does not match the number of samples")
    if p < 2:
        raise ValueError("reverse KL gradient needs at least 2 samples")
    wv = _weight_values(w, mat.shape[1])
    col_mean = mat.mean(axis=0)
    term_ratio = -col_mean * r.mean() + (mat * r[:, None]).mean(axis=0)
    s = mat @ wv
    cov = (mat - col_mean).T @ (s - s.mean()) / (p - 1)
    return term_ratio + cov


def taylor_decrease(g, h, step) -> float:
    """Predicted objective change ``g @ step (+ 0.5 step' H step)`` for a move.

    ``g`` may be a GradientEstimate or a plain vector, ``h`` a HessianEstimate,
    a matrix, or None for a first-order prediction.
    """
    gv = g.g_hat if isinstance(g, GradientEstimate) else np.asarray(g, dtype=float)
    step = np.asarray(step, dtype=float).ravel()
    if step.shape[0] != gv.shape[0]:
        raise ValueError("step length does not match gradient length")
    value = float(gv @ step)
    if h is not None:
        hm = h.h_hat if isinstance(h, HessianEstimate) else np.asarray(h, dtype=float)
        value += 0.5 * float(step @ hm @ step)
    return value
