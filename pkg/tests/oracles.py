"""Independent reference implementations used only to validate the library.

Each oracle deliberately takes a different route from the code under test:
brute-force enumeration, breakpoint (active-set) solves, quadrature, plain
Monte Carlo with scipy densities, and finite differences.
"""

from __future__ import annotations

import itertools

import numpy as np
from scipy import integrate, stats


def enumerate_integer_points(n: int, b_max: int, l_max: int) -> np.ndarray:
    """All integer weight vectors in the feasible set (desk scale only)."""
    grids = np.meshgrid(*([np.arange(l_max + 1)] * n), indexing="ij")
    points = np.stack([g.ravel() for g in grids], axis=1).astype(float)
    keep = np.sum(np.abs(points - 1.0), axis=1) <= b_max + 1e-12
    return points[keep]


def project_breakpoint_oracle(v: np.ndarray, b_max: int, l_max: int) -> np.ndarray:
    """Exact projection via enumeration of the piecewise-linear segments of
    the L1 norm as a function of the shrinkage multiplier (every segment is
    one active-set pattern)."""
    z = np.asarray(v, dtype=float) - 1.0
    lo, hi = -1.0, float(l_max - 1)
    clipped = np.clip(z, lo, hi)
    if np.sum(np.abs(clipped)) <= b_max + 1e-12:
        return clipped + 1.0
    cap = np.where(z >= 0, hi, -lo)
    absz = np.abs(z)

    def l1_at(lam: float) -> float:
        return float(np.sum(np.clip(absz - lam, 0.0, cap)))

    breaks = np.unique(np.concatenate([[0.0], absz, absz - cap]))
    breaks = np.sort(breaks[breaks >= 0.0])
    lam_star = None
    for k in range(len(breaks) - 1):
        left, right = breaks[k], breaks[k + 1]
        gl, gr = l1_at(left), l1_at(right)
        if gl >= b_max >= gr:
            lam_star = left if gl == gr else left + (gl - b_max) * (right - left) / (gl - gr)
            break
    if lam_star is None:
        lam_star = breaks[-1]
    u = np.clip(np.sign(z) * np.maximum(absz - lam_star, 0.0), lo, hi)
    return u + 1.0


def project_grid_oracle(v: np.ndarray, b_max: int, l_max: int, step: float = 1e-3) -> np.ndarray:
    """Dense-grid argmin of the projection objective (n = 2 only)."""
    assert len(v) == 2
    axis = np.arange(0.0, l_max + step / 2, step)
    g0, g1 = np.meshgrid(axis, axis, indexing="ij")
    feasible = np.abs(g0 - 1.0) + np.abs(g1 - 1.0) <= b_max + 1e-12
    d2 = (g0 - v[0]) ** 2 + (g1 - v[1]) ** 2
    d2[~feasible] = np.inf
    i, j = np.unravel_index(np.argmin(d2), d2.shape)
    return np.array([axis[i], axis[j]])


def covariance_loops(mat: np.ndarray) -> np.ndarray:
    """np.cov as the reference for the hand-rolled sample covariance."""
    return np.atleast_2d(np.cov(np.asarray(mat, dtype=float), rowvar=False, ddof=1))


def invgamma_kl_quadrature(a1: float, b1: float, a2: float, b2: float) -> float:
    """KL between inverse-gamma laws by adaptive quadrature of the integrand.

    Integrated piecewise over a quantile ladder; a single pass over the full
    heavy-tailed support misses the mass near the mode.
    """
    p = stats.invgamma(a1, scale=b1)
    q = stats.invgamma(a2, scale=b2)

    def integrand(x):
        return p.pdf(x) * (p.logpdf(x) - q.logpdf(x))

    ladder = p.ppf([1e-13, 1e-8, 1e-4, 0.05, 0.5, 0.95, 1 - 1e-4, 1 - 1e-8, 1 - 1e-13])
    total = 0.0
    for lo, hi in zip(ladder[:-1], ladder[1:]):
        piece, _ = integrate.quad(integrand, lo, hi, limit=200)
        total += piece
    return float(total)


def nig_logpdf_scipy(mu, lam, a, b, beta, sigma2) -> float:
    """Joint density via scipy building blocks (independent of the library)."""
    cov = sigma2 * np.linalg.inv(lam)
    return float(
        stats.invgamma(a, scale=b).logpdf(sigma2)
        + stats.multivariate_normal(mean=mu, cov=cov).logpdf(beta)
    )


def sample_nig_scipy(mu, lam, a, b, size, rng):
    """Exact draws via scipy: sigma2 from invgamma, beta conditionally normal."""
    sigma2 = stats.invgamma(a, scale=b).rvs(size=size, random_state=rng)
    cov_factor = np.linalg.cholesky(np.linalg.inv(lam))
    z = rng.standard_normal((size, len(mu)))
    betas = mu + np.sqrt(sigma2)[:, None] * (z @ cov_factor.T)
    return betas, sigma2


def nig_kl_monte_carlo(p, q, size: int, rng) -> tuple[float, float]:
    """E_p[log p - log q] with exact sampling; returns (estimate, stderr)."""
    betas, sigma2 = sample_nig_scipy(p.mu, p.lam, p.a, p.b, size, rng)
    cov_p = np.linalg.inv(p.lam)
    cov_q = np.linalg.inv(q.lam)
    ig_p = stats.invgamma(p.a, scale=p.b)
    ig_q = stats.invgamma(q.a, scale=q.b)
    diffs = ig_p.logpdf(sigma2) - ig_q.logpdf(sigma2)
    # Conditional Gaussian log-density difference, vectorized over draws.
    for mu, lam, sign in ((p.mu, p.lam, 1.0), (q.mu, q.lam, -1.0)):
        dev = betas - mu
        quad = np.einsum("ij,jk,ik->i", dev, lam, dev) / sigma2
        logdet = np.linalg.slogdet(lam)[1]
        d = len(mu)
        diffs += sign * 0.5 * (logdet - d * np.log(2.0 * np.pi * sigma2) - quad)
    return float(np.mean(diffs)), float(np.std(diffs, ddof=1) / np.sqrt(size))


def fd_gradient(fn, x: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """Central finite differences of a scalar function."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        out[i] = (fn(x + e) - fn(x - e)) / (2.0 * h)
    return out


def projected_gradient_descent(grad_fn, project_fn, w0: np.ndarray, step: float, iters: int):
    """Deterministic projected gradient reference optimizer."""
    w = np.asarray(w0, dtype=float).copy()
    for _ in range(iters):
        w = project_fn(w - step * grad_fn(w))
    return w


def quadratic_grid_min(v_grid_axis, b_max, g, h, center):
    """Exhaustive fine-grid minimum of the local quadratic model (n = 2)."""
    g0, g1 = np.meshgrid(v_grid_axis, v_grid_axis, indexing="ij")
    feasible = np.abs(g0 - 1.0) + np.abs(g1 - 1.0) <= b_max + 1e-12
    d0, d1 = g0 - center[0], g1 - center[1]
    val = (
        g[0] * d0
        + g[1] * d1
        + 0.5 * (h[0, 0] * d0 * d0 + 2.0 * h[0, 1] * d0 * d1 + h[1, 1] * d1 * d1)
    )
    val[~feasible] = np.inf
    i, j = np.unravel_index(np.argmin(val), val.shape)
    return np.array([v_grid_axis[i], v_grid_axis[j]]), float(val[i, j])


def textbook_conjugate_update(mu0, lam0, a0, b0, x, y):
    """Unweighted conjugate linear-regression update, coded plainly."""
    lam_n = lam0 + x.T @ x
    mu_n = np.linalg.inv(lam_n) @ (lam0 @ mu0 + x.T @ y)
    a_n = a0 + 0.5 * len(y)
    b_n = b0 + 0.5 * float(mu0 @ lam0 @ mu0 + y @ y - mu_n @ lam_n @ mu_n)
    return mu_n, lam_n, a_n, b_n


def all_sign_patterns(n: int):
    return itertools.product((-1, 0, 1), repeat=n)
