"""Posterior sampling backends.

Plain Hamiltonian Monte Carlo with dual-averaging step-size adaptation and a
fixed leapfrog count covers the generic differentiable models in scope; the
conjugate linear model gets exact iid draws.  Attack loops change the weight
vector gradually, so chains warm-start from the previous iteration's state
with a shortened warmup.  A Laplace approximation supplies Gaussian posterior
summaries where no closed form exists.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .core import Dataset, Model, RngSeed, _weight_values
from .models.nig import NigParams, sample_nig_params

__all__ = [
    "GaussianApprox",
    "HmcConfig",
    "HmcState",
    "OptimizationError",
    "SaddlePointError",
    "SampleBatch",
    "SamplerHealthError",
    "laplace_approx",
    "sample_nig_exact",
    "sample_posterior",
]

LOG_2PI = float(np.log(2.0 * np.pi))


class SamplerHealthError(RuntimeError):
    """Raised when a chain produces too many divergent trajectories."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class OptimizationError(RuntimeError):
    """Raised when an inner optimizer fails; carries the last iterate."""

    def __init__(self, message: str, last_iterate: np.ndarray | None = None):
        super().__init__(message)
        self.last_iterate = last_iterate


class SaddlePointError(OptimizationError):
    """The curvature at the located stationary point is not negative definite."""


@dataclass(frozen=True)
class HmcConfig:
    warmup_steps: int = 500
    samples: int = 1000
    leapfrog_steps: int = 32
    initial_step_size: float = 0.1
    target_accept: float = 0.8
    seed: RngSeed = field(default_factory=lambda: RngSeed(0, 0))
    max_divergence_fraction: float = 0.05
    warm_start_warmup_fraction: float = 0.25

    def __post_init__(self):
        if self.samples < 1 or self.leapfrog_steps < 1:
            raise ValueError("samples and leapfrog_steps must be at least 1")
        if self.initial_step_size <= 0:
            raise ValueError("initial step size must be positive")
        if not 0.0 < self.target_accept < 1.0:
            raise ValueError("target_accept must lie in (0, 1)")


@dataclass(frozen=True)
class HmcState:
    """Opaque warm-start state: last position, step size, and mass diagonal."""

    position: np.ndarray
    step_size: float
    inv_mass: np.ndarray | None = None


@dataclass(frozen=True)
class SampleBatch:
    thetas: np.ndarray
    accept_rate: float
    warm_start_state: HmcState | None = None
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        t = np.atleast_2d(np.asarray(self.thetas, dtype=float))
        if t.shape[0] < 1:
            raise ValueError("a sample batch needs at least one draw")
        if not 0.0 <= self.accept_rate <= 1.0:
            raise ValueError("accept_rate must lie in [0, 1]")
        object.__setattr__(self, "thetas", t)

    @property
    def size(self) -> int:
        return self.thetas.shape[0]


def _leapfrog(pos, mom, step, n_steps, grad_fn, inv_mass):
    g = grad_fn(pos)
    mom = mom + 0.5 * step * g
    for _ in range(n_steps - 1):
        pos = pos + step * (inv_mass * mom)
        if not np.all(np.isfinite(pos)):
            return pos, mom  # divergent; the energy check rejects it
        g = grad_fn(pos)
        mom = mom + step * g
    pos = pos + step * (inv_mass * mom)
    if not np.all(np.isfinite(pos)):
        return pos, mom
    mom = mom + 0.5 * step * grad_fn(pos)
    return pos, mom


def _kinetic(mom, inv_mass) -> float:
    return 0.5 * float(mom @ (inv_mass * mom))


def _reasonable_step_size(pos, logp_grad, step0, rng, inv_mass):
    """Double or halve the step until one-step acceptance crosses one half."""
    lp0, _ = logp_grad(pos)
    mom = rng.standard_normal(pos.shape[0]) / np.sqrt(inv_mass)
    h0 = lp0 - _kinetic(mom, inv_mass)

    def joint(step):
        p, m = _leapfrog(pos, mom, step, 1, lambda q: logp_grad(q)[1], inv_mass)
        if not np.all(np.isfinite(p)):
            return -np.inf
        lp, _ = logp_grad(p)
        return lp - _kinetic(m, inv_mass)

    step = step0
    h1 = joint(step)
    if not np.isfinite(h1):
        while not np.isfinite(h1) and step > 1e-10:
            step *= 0.5
            h1 = joint(step)
        return max(step, 1e-10)
    direction = 1.0 if (h1 - h0) > np.log(0.5) else -1.0
    for _ in range(50):
        step *= 2.0**direction
        h1 = joint(step)
        if not np.isfinite(h1):
            h1 = -np.inf
        if direction * (h1 - h0) <= direction * np.log(0.5):
            break
    return float(np.clip(step, 1e-10, 1e3))


class _DualAveraging:
    """Nesterov dual averaging of the log step size toward a target
    acceptance rate (the standard warmup adaptation scheme)."""

    def __init__(self, step0: float, target: float, gamma=0.05, t0=10.0, kappa=0.75):
        self.mu = np.log(10.0 * step0)
        self.log_step_bar = np.log(step0)
        self.h_bar = 0.0
        self.target = target
        self.gamma, self.t0, self.kappa = gamma, t0, kappa
        self.t = 0

    def update(self, accept_prob: float) -> float:
        self.t += 1
        eta = 1.0 / (self.t + self.t0)
        self.h_bar = (1.0 - eta) * self.h_bar + eta * (self.target - accept_prob)
        log_step = self.mu - np.sqrt(self.t) / self.gamma * self.h_bar
        weight = self.t**-self.kappa
        self.log_step_bar = weight * log_step + (1.0 - weight) * self.log_step_bar
        return float(np.exp(log_step))

    def final(self) -> float:
        return float(np.exp(self.log_step_bar))


def sample_posterior(
    model: Model,
    data: Dataset,
    w,
    cfg: HmcConfig,
    warm_start: HmcState | None = None,
) -> SampleBatch:
    """Draw samples targeting the weighted posterior with HMC.

    With ``warm_start`` the chain starts from the supplied position and step
    size and runs a shortened warmup (``warm_start_warmup_fraction`` of the
    cold warmup).  Raises SamplerHealthError when the post-warmup fraction of
    divergent trajectories exceeds the configured threshold.
    """
    wv = _weight_values(w, data.n)
    if np.min(wv) < -1e-9:
        raise ValueError("weights must be nonnegative")
    logp_grad = model.logjoint_closure(data, wv)
    grad_fn = lambda q: logp_grad(q)[1]
    rng = cfg.seed.generator()
    d = model.dim

    if warm_start is not None:
        pos = np.array(warm_start.position, dtype=float)
        inv_mass = (
            np.ones(d) if warm_start.inv_mass is None else np.array(warm_start.inv_mass)
        )
        windows = [("adapt", max(1, int(round(cfg.warmup_steps * cfg.warm_start_warmup_fraction))))]
        step = float(warm_start.step_size)
    else:
        pos = np.asarray(model.init_params(data), dtype=float)
        inv_mass = np.ones(d)
        # First window adapts the step with unit mass; per-coordinate
        # variances from it set the mass diagonal for the second window.
        first = max(10, int(round(0.4 * cfg.warmup_steps)))
        windows = [("mass", first), ("adapt", max(10, cfg.warmup_steps - first))]
        step = None

    divergences = 0
    accepts = 0
    draws = np.empty((cfg.samples, d))
    lp_cur, _ = logp_grad(pos)

    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        if step is None:
            step = _reasonable_step_size(pos, logp_grad, cfg.initial_step_size, rng, inv_mass)

        def transition(step_size):
            nonlocal pos, lp_cur
            mom = rng.standard_normal(d) / np.sqrt(inv_mass)
            h_cur = lp_cur - _kinetic(mom, inv_mass)
            # Jittered trajectory length breaks the periodicity of fixed-length
            # trajectories on near-Gaussian targets.
            n_steps = int(rng.integers((cfg.leapfrog_steps + 1) // 2, cfg.leapfrog_steps + 1))
            new_pos, new_mom = _leapfrog(pos, mom, step_size, n_steps, grad_fn, inv_mass)
            if np.all(np.isfinite(new_pos)):
                lp_new, _ = logp_grad(new_pos)
                log_accept = lp_new - _kinetic(new_mom, inv_mass) - h_cur
            else:
                lp_new, log_accept = -np.inf, -np.inf
            divergent = not np.isfinite(log_accept) or log_accept < -1000.0
            accept_prob = 0.0 if divergent else min(1.0, float(np.exp(min(log_accept, 0.0))))
            accepted = not divergent and np.log(rng.uniform()) < log_accept
            if accepted:
                pos, lp_cur = new_pos, lp_new
            return accept_prob, accepted, divergent

        for kind, length in windows:
            averager = _DualAveraging(step, cfg.target_accept)
            history = np.empty((length, d)) if kind == "mass" else None
            for it in range(length):
                accept_prob, _, _ = transition(step)
                step = averager.update(accept_prob)
                if history is not None:
                    history[it] = pos
            step = averager.final()
            if kind == "mass":
                tail = history[length // 2 :]
                m = tail.shape[0]
                var = tail.var(axis=0, ddof=1) if m > 1 else np.ones(d)
                # Shrink toward a small constant so short windows stay sane.
                inv_mass = np.maximum(m / (m + 5.0) * var + 5.0 / (m + 5.0) * 1e-3, 1e-12)
                step = _reasonable_step_size(pos, logp_grad, step, rng, inv_mass)

        for it in range(cfg.samples):
            _, accepted, divergent = transition(step)
            draws[it] = pos
            accepts += accepted
            divergences += divergent

    div_frac = divergences / cfg.samples
    diagnostics = {
        "accept_rate": accepts / cfg.samples,
        "divergences": int(divergences),
        "divergence_fraction": float(div_frac),
        "step_size": float(step),
        "warmup_steps": int(sum(length for _, length in windows)),
    }
    if div_frac > cfg.max_divergence_fraction:
        raise SamplerHealthError(
            f"{divergences}/{cfg.samples} divergent trajectories "
            f"(> {cfg.max_divergence_fraction:.0%})",
            diagnostics,
        )
    return SampleBatch(
        thetas=draws,
        accept_rate=accepts / cfg.samples,
        warm_start_state=HmcState(
            position=pos.copy(), step_size=float(step), inv_mass=inv_mass.copy()
        ),
        diagnostics=diagnostics,
    )


def sample_nig_exact(params: NigParams, s: int, seed: RngSeed) -> SampleBatch:
    """Exact iid draws from a normal-inverse-gamma posterior.

    Thetas are on the model's unconstrained scale (beta, log sigma2).
    """
    if s < 1:
        raise ValueError("sample count must be positive")
    thetas = sample_nig_params(params, s, seed.generator())
    return SampleBatch(thetas=thetas, accept_rate=1.0, diagnostics={"sampler": "exact_nig"})


@dataclass(frozen=True)
class GaussianApprox:
    """Gaussian posterior approximation with a positive-definite covariance."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float).ravel()
        cov = np.asarray(self.cov, dtype=float)
        if cov.shape != (mean.size, mean.size):
            raise ValueError("covariance shape does not match mean")
        cov = 0.5 * (cov + cov.T)
        try:
            np.linalg.cholesky(cov)
        except np.linalg.LinAlgError:
            raise ValueError("covariance must be positive definite") from None
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def d(self) -> int:
        return self.mean.size

    def sample(self, size: int, seed: RngSeed) -> SampleBatch:
        rng = seed.generator()
        chol = np.linalg.cholesky(self.cov)
        z = rng.standard_normal((size, self.d))
        return SampleBatch(
            thetas=self.mean + z @ chol.T,
            accept_rate=1.0,
            diagnostics={"sampler": "exact_gaussian"},
        )

    def logpdf(self, theta: np.ndarray) -> float:
        diff = np.asarray(theta, dtype=float).ravel() - self.mean
        chol = cho_factor(self.cov, lower=True)
        logdet = 2.0 * float(np.sum(np.log(np.diag(chol[0]))))
        quad = float(diff @ cho_solve(chol, diff))
        return -0.5 * (self.d * LOG_2PI + logdet + quad)

    def with_flipped_mean(self, coord: int) -> "GaussianApprox":
        if not 0 <= coord < self.d:
            raise ValueError("coordinate out of range")
        mean = self.mean.copy()
        mean[coord] = -mean[coord]
        return GaussianApprox(mean, self.cov)


def _hessian_fd(grad_fn, theta, h=1e-5):
    d = theta.size
    hess = np.empty((d, d))
    for j in range(d):
        e = np.zeros(d)
        e[j] = h
        hess[:, j] = (grad_fn(theta + e) - grad_fn(theta - e)) / (2.0 * h)
    return 0.5 * (hess + hess.T)


def laplace_approx(
    model: Model,
    data: Dataset,
    w,
    init: np.ndarray | None = None,
    grad_tol: float = 1e-8,
    max_iters: int = 200,
) -> GaussianApprox:
    """Gaussian fit at the mode of the weighted log-joint.

    Damped Newton from ``init`` (model default when omitted) with Hessians
    from central finite differences of the gradient, falling back to a
    gradient step when the curvature is not usable.  The covariance is the
    inverse negative Hessian at the mode.
    """
    wv = _weight_values(w, data.n)
    value_and_grad = model.logjoint_closure(data, wv)
    grad_fn = lambda q: value_and_grad(q)[1]
    theta = np.array(model.init_params(data) if init is None else init, dtype=float)
    if theta.shape != (model.dim,):
        raise ValueError("init has wrong dimension")

    lp, g = value_and_grad(theta)
    for _ in range(max_iters):
        if np.linalg.norm(g) <= grad_tol:
            break
        hess = _hessian_fd(grad_fn, theta)
        try:
            chol = cho_factor(-hess, lower=True)
            direction = cho_solve(chol, g)
        except np.linalg.LinAlgError:
            direction = g  # not locally concave yet; plain ascent
        step = 1.0
        for _ in range(60):
            cand = theta + step * direction
            lp_cand, g_cand = value_and_grad(cand)
            if np.isfinite(lp_cand) and lp_cand >= lp - 1e-12:
                theta, lp, g = cand, lp_cand, g_cand
                break
            step *= 0.5
        else:
            raise OptimizationError("line search failed to improve the log-joint", theta)
    else:
        raise OptimizationError(
            f"no convergence after {max_iters} Newton iterations "
            f"(gradient norm {np.linalg.norm(g):.2e})",
            theta,
        )

    hess = _hessian_fd(grad_fn, theta)
    try:
        chol = cho_factor(-hess, lower=True)
    except np.linalg.LinAlgError:
        raise SaddlePointError("negative Hessian at the mode is not positive definite", theta)
    cov = cho_solve(chol, np.eye(model.dim))
    return GaussianApprox(theta, 0.5 * (cov + cov.T))
