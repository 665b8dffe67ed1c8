"""Poisoning attack heuristics with a scikit-learn estimator surface.

Every attack searches the feasible set for an integer weight vector whose
induced posterior is close (in forward KL) to the attacker's target.  Two
families share one iteration scaffold:

- Rounded relaxation: optimize the continuous relaxation (projected SGD, an
  Adam variant on the projected pseudo-gradient, or a second-order step that
  minimizes a local quadratic model over the feasible set), then round the
  relaxed optimum to the nearest feasible integer point.
- Integer steps: greedy single-coordinate moves that never leave the integer
  lattice, scored by the Taylor-predicted objective change (first- or
  second-order), plus the one-shot sign-method baseline.

Estimators follow the sklearn contract: hyperparameters in ``__init__``,
``fit(X, y)`` computes ``w_`` and friends, ``transform`` materializes the
poisoned dataset.  They compose with ``get_params``/``set_params``/``clone``.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator

from .backends import ExactConjugateBackend, IterationStats, SamplingBackend
from .core import Budget, Dataset, Model, RngSeed, WeightVector
from .estimators import GradientEstimate
from .feasible import FeasibleSet
from .targets import Target

__all__ = [
    "AdamRelaxationAttack",
    "AttackResult",
    "CoordinateDescentAttack",
    "FgsmAttack",
    "IterationRecord",
    "METHODS",
    "SecondOrderRelaxationAttack",
    "SgdRelaxationAttack",
    "make_attack",
    "stopping_check",
]


@dataclass(frozen=True)
class IterationRecord:
    """Per-iteration trace entry.

    Forward decrease estimates predict the change of the objective along this
    iteration's step using this iteration's gradient (and Hessian when the
    method estimates one).  Backward estimates re-predict the previous step
    with the current iteration's estimates, so summing forward and backward
    series brackets the objective trajectory.
    """

    iteration: int
    grad_norm: float
    grad_max_abs: float
    grad_stderr_mean: float
    step_norm: float
    predicted_decrease_fo: float
    predicted_decrease_so: float | None = None
    backward_decrease_fo: float | None = None
    backward_decrease_so: float | None = None
    sampler: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "iteration": self.iteration,
            "grad_norm": self.grad_norm,
            "grad_max_abs": self.grad_max_abs,
            "grad_stderr_mean": self.grad_stderr_mean,
            "step_norm": self.step_norm,
            "predicted_decrease_fo": self.predicted_decrease_fo,
            "predicted_decrease_so": self.predicted_decrease_so,
            "backward_decrease_fo": self.backward_decrease_fo,
            "backward_decrease_so": self.backward_decrease_so,
            "sampler": self.sampler,
        }


@dataclass(frozen=True)
class AttackResult:
    """Final integer attack plus the run's trace and replay seeds."""

    w_star: WeightVector
    relaxed_w: WeightVector | None
    trace: tuple[IterationRecord, ...]
    seeds: tuple[RngSeed, ...]
    n_iterations: int
    stop_reason: str
    method: str
    wall_time_s: float = 0.0

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "w_star": self.w_star.values.tolist(),
            "relaxed_w": None if self.relaxed_w is None else self.relaxed_w.values.tolist(),
            "n_iterations": self.n_iterations,
            "stop_reason": self.stop_reason,
            "wall_time_s": self.wall_time_s,
            "seeds": [s.to_dict() for s in self.seeds],
            "trace": [r.to_dict() for r in self.trace],
        }


def stopping_check(
    predicted_decreases, stop_ratio: float, stop_patience: int
) -> bool:
    """Relaxation stopping rule: the latest ``stop_patience`` predicted
    decreases are all negligible relative to the first iteration's.

    An exactly zero prediction counts as negligible (covers the degenerate
    start where the target already equals the tainted posterior).
    """
    preds = [float(p) for p in predicted_decreases]
    if len(preds) < max(stop_patience, 1):
        return False
    threshold = stop_ratio * abs(preds[0])
    return all(abs(p) < threshold or p == 0.0 for p in preds[-stop_patience:])


def _sign_nonzero(values: np.ndarray) -> np.ndarray:
    return np.where(values >= 0.0, 1.0, -1.0)


def _spectral_bound(h: np.ndarray, iters: int = 40) -> float:
    """Deterministic power-iteration upper bound on the top eigenvalue."""
    n = h.shape[0]
    v = np.ones(n) + 1e-3 * np.arange(n) / max(n - 1, 1)
    v /= np.linalg.norm(v)
    ev = 1.0
    for _ in range(iters):
        hv = h @ v
        norm = np.linalg.norm(hv)
        if norm <= 1e-300:
            return 1e-12
        ev = norm
        v = hv / norm
    return 1.05 * float(ev)


def _solve_quadratic_subproblem(
    fs: FeasibleSet, w: np.ndarray, g: np.ndarray, h: np.ndarray, max_iters: int, tol: float
) -> np.ndarray:
    """Minimize ``g'(w'-w) + (w'-w)'H(w'-w)/2`` over the feasible set.

    Accelerated projected gradient with step 1/L from a power-iteration bound
    on ``H``; exact enough for the attack because the relaxation is re-solved
    every outer iteration.
    """
    lip = max(_spectral_bound(h), 1e-12)
    x = w.copy()
    z = x.copy()
    t_k = 1.0
    for _ in range(max_iters):
        grad_q = g + h @ (z - w)
        x_new = fs.project(z - grad_q / lip).values
        t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t_k * t_k))
        z = x_new + ((t_k - 1.0) / t_new) * (x_new - x)
        done = np.max(np.abs(x_new - x)) < tol
        x, t_k = x_new, t_new
        if done:
            break
    return x


def _as_seed(seed) -> RngSeed:
    if isinstance(seed, RngSeed):
        return seed
    return RngSeed(int(seed), 0)


def _grad_summary(grad: GradientEstimate) -> tuple[float, float, float]:
    g = grad.g_hat
    return (
        float(np.linalg.norm(g)),
        float(np.max(np.abs(g))) if g.size else 0.0,
        float(np.mean(grad.per_coordinate_stderr)),
    )


class BasePoisoningAttack(BaseEstimator):
    """Shared scaffolding: problem assembly, tracing, rounding, transform."""

    _method = "base"
    _needs_hessian = "none"

    def __init__(
        self,
        model=None,
        target=None,
        b_max=10,
        l_max=2,
        p_samples=1000,
        q_samples=1000,
        backend="sampling",
        posterior_sampler="auto",
        mcmc=None,
        resample_target=False,
        hessian_sample_source="posterior",
        max_iters=200,
        stop_ratio=0.01,
        stop_patience=3,
        seed=0,
    ):
        self.model = model
        self.target = target
        self.b_max = b_max
        self.l_max = l_max
        self.p_samples = p_samples
        self.q_samples = q_samples
        self.backend = backend
        self.posterior_sampler = posterior_sampler
        self.mcmc = mcmc
        self.resample_target = resample_target
        self.hessian_sample_source = hessian_sample_source
        self.max_iters = max_iters
        self.stop_ratio = stop_ratio
        self.stop_patience = stop_patience
        self.seed = seed

    # -- problem assembly -------------------------------------------------

    def _as_dataset(self, X, y) -> Dataset:
        if isinstance(X, Dataset):
            if y is not None:
                raise ValueError("pass either a Dataset or arrays, not both")
            return X
        return Dataset(np.asarray(X, dtype=float), y)

    def _build_backend(self, data: Dataset, seed: RngSeed):
        if not isinstance(self.model, Model):
            raise ValueError("model must be set to a Model instance before fit")
        if not isinstance(self.target, Target):
            raise ValueError("target must be set to a Target instance before fit")
        if self.backend == "exact":
            return ExactConjugateBackend(self.model, data, self.target)
        if self.backend == "sampling":
            return SamplingBackend(
                self.model,
                data,
                self.target,
                p_samples=self.p_samples,
                q_samples=self.q_samples,
                mcmc=self.mcmc,
                posterior_sampler=self.posterior_sampler,
                resample_target=self.resample_target,
                hessian_sample_source=self.hessian_sample_source,
                target_seed=seed.child(0),
            )
        raise ValueError("backend must be 'sampling' or 'exact'")

    # -- sklearn surface ---------------------------------------------------

    def fit(self, X, y=None):
        data = self._as_dataset(X, y)
        seed = _as_seed(self.seed)
        fs = FeasibleSet(data.n, Budget(self.b_max, self.l_max))
        backend = self._build_backend(data, seed)
        start = time.perf_counter()
        result = self._run(data, fs, backend, seed)
        result = AttackResult(
            w_star=result.w_star,
            relaxed_w=result.relaxed_w,
            trace=result.trace,
            seeds=result.seeds,
            n_iterations=result.n_iterations,
            stop_reason=result.stop_reason,
            method=result.method,
            wall_time_s=time.perf_counter() - start,
        )
        if not fs.contains(result.w_star.values):
            raise RuntimeError("internal error: final attack vector is infeasible")
        self.result_ = result
        self.w_ = result.w_star.values.copy()
        self.relaxed_w_ = None if result.relaxed_w is None else result.relaxed_w.values.copy()
        self.trace_ = result.trace
        self.n_iter_ = result.n_iterations
        return self

    def transform(self, X, y=None):
        """Materialize the learned attack: drop deleted rows, copy replicated
        ones.  Returns the poisoned design matrix (and response when given)."""
        if not hasattr(self, "w_"):
            raise RuntimeError("attack is not fitted; call fit first")
        if isinstance(X, Dataset):
            return X.replicate_rows(self.w_)
        X = np.asarray(X)
        if X.shape[0] != self.w_.shape[0]:
            raise ValueError("X row count does not match the fitted weights")
        reps = np.rint(self.w_).astype(int)
        idx = np.repeat(np.arange(X.shape[0]), reps)
        if y is None:
            return X[idx]
        y = np.asarray(y)
        return X[idx], y[idx]

    def fit_transform(self, X, y=None):
        self.fit(X, y)
        return self.transform(X, y)

    # -- shared loop pieces -------------------------------------------------

    def _run(self, data, fs, backend, seed) -> AttackResult:
        raise NotImplementedError

    def _record(
        self,
        trace: list,
        t: int,
        stats: IterationStats,
        step: np.ndarray,
        fwd_so: float | None,
        prev_step: np.ndarray | None,
        prev_so_curv: float | None = None,
    ) -> None:
        g = stats.grad.g_hat
        norm, max_abs, stderr = _grad_summary(stats.grad)
        bwd_fo = bwd_so = None
        if prev_step is not None:
            bwd_fo = float(g @ prev_step)
            if prev_so_curv is not None:
                bwd_so = bwd_fo - 0.5 * prev_so_curv
        trace.append(
            IterationRecord(
                iteration=t,
                grad_norm=norm,
                grad_max_abs=max_abs,
                grad_stderr_mean=stderr,
                step_norm=float(np.linalg.norm(step)),
                predicted_decrease_fo=float(g @ step),
                predicted_decrease_so=fwd_so,
                backward_decrease_fo=bwd_fo,
                backward_decrease_so=bwd_so,
                sampler=stats.diagnostics or {},
            )
        )

    def _finish_relaxation(
        self, fs: FeasibleSet, w: np.ndarray, trace, seeds, n_done, reason
    ) -> AttackResult:
        relaxed = fs.project(w)  # snap float noise back inside the set
        w_star = fs.round_constrained(relaxed)
        return AttackResult(
            w_star=w_star,
            relaxed_w=relaxed,
            trace=tuple(trace),
            seeds=tuple(seeds),
            n_iterations=n_done,
            stop_reason=reason,
            method=self._method,
        )


class _RelaxationMixin:
    """Common outer loop for the relax-then-round family."""

    def _learning_rate(self, t: int) -> float:
        schedule = getattr(self, "schedule", "constant")
        rate = float(getattr(self, "learning_rate", 0.1))
        if schedule == "constant":
            return rate
        if schedule == "inverse_t":
            return rate / (t + 1.0)
        raise ValueError("schedule must be 'constant' or 'inverse_t'")

    def _run(self, data, fs, backend, seed) -> AttackResult:
        n = data.n
        if fs.budget.b_max == 0:
            return AttackResult(
                w_star=WeightVector.ones(n),
                relaxed_w=WeightVector.ones(n),
                trace=(),
                seeds=(seed,),
                n_iterations=0,
                stop_reason="zero_budget",
                method=self._method,
            )
        w = np.ones(n)
        trace: list[IterationRecord] = []
        predicted: list[float] = []
        prev_step = None
        prev_curv = None
        state = self._init_state(n)
        reason = "max_iterations"
        t = 0
        for t in range(int(self.max_iters)):
            stats = backend.evaluate(w, seed.child(t + 1), hessian=self._needs_hessian)
            w_new, fwd_so, curv = self._step(fs, w, stats, t, state)
            step = w_new - w
            self._record(trace, t, stats, step, fwd_so, prev_step, prev_curv)
            fwd = fwd_so if fwd_so is not None else float(stats.grad.g_hat @ step)
            predicted.append(fwd)
            prev_step, prev_curv, w = step, curv, w_new
            if stopping_check(predicted, self.stop_ratio, self.stop_patience):
                reason = "stalled"
                t += 1
                break
        else:
            t = int(self.max_iters)
        return self._finish_relaxation(fs, w, trace, (seed,), t, reason)

    def _init_state(self, n: int):
        return None

    def _step(self, fs, w, stats, t, state):
        raise NotImplementedError


class SgdRelaxationAttack(_RelaxationMixin, BasePoisoningAttack):
    """Projected stochastic gradient descent on the relaxation, then optimal
    rounding.  ``schedule='inverse_t'`` gives the classic ``rate / (t + 1)``
    decay; ``'constant'`` keeps the rate fixed."""

    _method = "sgd_r2"
    _needs_hessian = "none"

    def __init__(
        self,
        model=None,
        target=None,
        b_max=10,
        l_max=2,
        learning_rate=0.1,
        schedule="constant",
        p_samples=1000,
        q_samples=1000,
        backend="sampling",
        posterior_sampler="auto",
        mcmc=None,
        resample_target=False,
        hessian_sample_source="posterior",
        max_iters=200,
        stop_ratio=0.01,
        stop_patience=3,
        seed=0,
    ):
        super().__init__(
            model=model,
            target=target,
            b_max=b_max,
            l_max=l_max,
            p_samples=p_samples,
            q_samples=q_samples,
            backend=backend,
            posterior_sampler=posterior_sampler,
            mcmc=mcmc,
            resample_target=resample_target,
            hessian_sample_source=hessian_sample_source,
            max_iters=max_iters,
            stop_ratio=stop_ratio,
            stop_patience=stop_patience,
            seed=seed,
        )
        self.learning_rate = learning_rate
        self.schedule = schedule

    def _step(self, fs, w, stats, t, state):
        w_new = fs.project(w - self._learning_rate(t) * stats.grad.g_hat).values
        return w_new, None, None


class AdamRelaxationAttack(_RelaxationMixin, BasePoisoningAttack):
    """Adam on the projected pseudo-gradient ``w - project(w - rate * g)``,
    with a final projection each step.  The moment normalization allows large
    moves along the feasible set's boundary where plain projected SGD slows
    down."""

    _method = "adam_r2"
    _needs_hessian = "none"

    def __init__(
        self,
        model=None,
        target=None,
        b_max=10,
        l_max=2,
        learning_rate=0.1,
        schedule="constant",
        adam_step_size=0.1,
        adam_beta1=0.9,
        adam_beta2=0.999,
        adam_eps=1e-8,
        p_samples=1000,
        q_samples=1000,
        backend="sampling",
        posterior_sampler="auto",
        mcmc=None,
        resample_target=False,
        hessian_sample_source="posterior",
        max_iters=200,
        stop_ratio=0.01,
        stop_patience=3,
        seed=0,
    ):
        super().__init__(
            model=model,
            target=target,
            b_max=b_max,
            l_max=l_max,
            p_samples=p_samples,
            q_samples=q_samples,
            backend=backend,
            posterior_sampler=posterior_sampler,
            mcmc=mcmc,
            resample_target=resample_target,
            hessian_sample_source=hessian_sample_source,
            max_iters=max_iters,
            stop_ratio=stop_ratio,
            stop_patience=stop_patience,
            seed=seed,
        )
        self.learning_rate = learning_rate
        self.schedule = schedule
        self.adam_step_size = adam_step_size
        self.adam_beta1 = adam_beta1
        self.adam_beta2 = adam_beta2
        self.adam_eps = adam_eps

    def _init_state(self, n: int):
        return {"m": np.zeros(n), "v": np.zeros(n)}

    def _step(self, fs, w, stats, t, state):
        pseudo = w - fs.project(w - self._learning_rate(t) * stats.grad.g_hat).values
        b1, b2 = float(self.adam_beta1), float(self.adam_beta2)
        state["m"] = b1 * state["m"] + (1.0 - b1) * pseudo
        state["v"] = b2 * state["v"] + (1.0 - b2) * pseudo**2
        m_hat = state["m"] / (1.0 - b1 ** (t + 1))
        v_hat = state["v"] / (1.0 - b2 ** (t + 1))
        move = self.adam_step_size * m_hat / (np.sqrt(v_hat) + self.adam_eps)
        return fs.project(w - move).values, None, None


class SecondOrderRelaxationAttack(_RelaxationMixin, BasePoisoningAttack):
    """Each step minimizes the local quadratic model of the objective over
    the feasible set (curvature from the sample covariance of the per-row
    log-likelihoods), then rounds at termination."""

    _method = "second_order_r2"
    _needs_hessian = "full"

    def __init__(
        self,
        model=None,
        target=None,
        b_max=10,
        l_max=2,
        inner_iters=500,
        inner_tol=1e-10,
        p_samples=1000,
        q_samples=1000,
        backend="sampling",
        posterior_sampler="auto",
        mcmc=None,
        resample_target=False,
        hessian_sample_source="posterior",
        max_iters=200,
        stop_ratio=0.01,
        stop_patience=3,
        seed=0,
    ):
        super().__init__(
            model=model,
            target=target,
            b_max=b_max,
            l_max=l_max,
            p_samples=p_samples,
            q_samples=q_samples,
            backend=backend,
            posterior_sampler=posterior_sampler,
            mcmc=mcmc,
            resample_target=resample_target,
            hessian_sample_source=hessian_sample_source,
            max_iters=max_iters,
            stop_ratio=stop_ratio,
            stop_patience=stop_patience,
            seed=seed,
        )
        self.inner_iters = inner_iters
        self.inner_tol = inner_tol

    def _step(self, fs, w, stats, t, state):
        g = stats.grad.g_hat
        h_reg = stats.hess.regularized()
        w_new = _solve_quadratic_subproblem(
            fs, w, g, h_reg, int(self.inner_iters), float(self.inner_tol)
        )
        step = w_new - w
        curv = float(step @ stats.hess.h_hat @ step)
        fwd_so = float(g @ step) + 0.5 * curv
        return w_new, fwd_so, curv


class FgsmAttack(BasePoisoningAttack):
    """One-shot sign-method baseline adapted to stochastic gradients.

    A single gradient estimate at the untouched weights; with a replication
    cap of at least 2 the budgeted rows with the largest gradient magnitudes
    move one unit against the gradient sign, and with a cap of 1 only
    deletions are possible, so the most positive gradients are deleted.  Ties
    break by ascending row index.
    """

    _method = "fgsm"
    _needs_hessian = "none"

    def _run(self, data, fs, backend, seed) -> AttackResult:
        n = data.n
        w = np.ones(n)
        trace: list[IterationRecord] = []
        if fs.budget.b_max == 0:
            return AttackResult(
                w_star=WeightVector.ones(n),
                relaxed_w=None,
                trace=(),
                seeds=(seed,),
                n_iterations=0,
                stop_reason="zero_budget",
                method=self._method,
            )
        stats = backend.evaluate(w, seed.child(1), hessian="none")
        g = stats.grad.g_hat
        take = min(fs.budget.b_max, n)
        if fs.budget.l_max >= 2:
            chosen = np.argsort(-np.abs(g), kind="stable")[:take]
            w[chosen] = 1.0 - _sign_nonzero(g[chosen])
        else:
            chosen = np.argsort(-g, kind="stable")[:take]
            w[chosen] = 0.0
        step = w - np.ones(n)
        self._record(trace, 0, stats, step, None, None)
        return AttackResult(
            w_star=WeightVector(w, integral=True),
            relaxed_w=None,
            trace=tuple(trace),
            seeds=(seed,),
            n_iterations=1,
            stop_reason="single_shot",
            method=self._method,
        )


class CoordinateDescentAttack(BasePoisoningAttack):
    """Greedy integer-steps search over single-coordinate unit moves.

    Each iteration re-estimates the gradient (and the Hessian diagonal for
    ``order=2``), scores every feasible move one unit against the gradient
    sign by its predicted objective change, and applies the best one.  The
    search stops when every feasible move predicts an increase, and is capped
    at ``b_max + max(5, ceil(0.1 * b_max))`` iterations by default since the
    predicted-increase rule may never fire when the budget constraint stays
    slack.
    """

    _method = "iscd"
    _needs_hessian = "none"  # per-order, see _run

    def __init__(
        self,
        model=None,
        target=None,
        b_max=10,
        l_max=2,
        order=2,
        max_steps=None,
        p_samples=1000,
        q_samples=1000,
        backend="sampling",
        posterior_sampler="auto",
        mcmc=None,
        resample_target=False,
        hessian_sample_source="posterior",
        max_iters=200,
        stop_ratio=0.01,
        stop_patience=3,
        seed=0,
    ):
        super().__init__(
            model=model,
            target=target,
            b_max=b_max,
            l_max=l_max,
            p_samples=p_samples,
            q_samples=q_samples,
            backend=backend,
            posterior_sampler=posterior_sampler,
            mcmc=mcmc,
            resample_target=resample_target,
            hessian_sample_source=hessian_sample_source,
            max_iters=max_iters,
            stop_ratio=stop_ratio,
            stop_patience=stop_patience,
            seed=seed,
        )
        self.order = order
        self.max_steps = max_steps

    @property
    def _method_name(self) -> str:
        return f"iscd_{int(self.order)}o"

    def _iteration_cap(self, b_max: int) -> int:
        if self.max_steps is not None:
            return int(self.max_steps)
        return b_max + max(5, int(np.ceil(0.1 * b_max)))

    def _run(self, data, fs, backend, seed) -> AttackResult:
        if self.order not in (1, 2):
            raise ValueError("order must be 1 or 2")
        n = data.n
        w = np.ones(n)
        trace: list[IterationRecord] = []
        reason = "iteration_cap"
        prev_step = None
        prev_curv = None
        need = "diag" if self.order == 2 else "none"
        cap = self._iteration_cap(fs.budget.b_max)
        steps_done = 0
        if fs.budget.b_max == 0:
            cap, reason = 0, "zero_budget"
        for t in range(cap):
            stats = backend.evaluate(w, seed.child(t + 1), hessian=need)
            g = stats.grad.g_hat
            h_diag = stats.hess_diag if self.order == 2 else np.zeros(n)
            up_ok, down_ok = fs.unit_move_feasibility(w)
            movable = ((g < 0) & up_ok) | ((g > 0) & down_ok)
            if not np.any(movable):
                self._record(trace, t, stats, np.zeros(n), None, prev_step, prev_curv)
                reason = "no_feasible_move"
                steps_done = t + 1
                break
            scores = np.where(movable, -np.abs(g) + 0.5 * h_diag, np.inf)
            j = int(np.argmin(scores))  # ties resolve to the lowest index
            if scores[j] > 0:
                self._record(trace, t, stats, np.zeros(n), None, prev_step, prev_curv)
                reason = "no_improving_move"
                steps_done = t + 1
                break
            direction = -1.0 if g[j] > 0 else 1.0
            step = np.zeros(n)
            step[j] = direction
            fwd_so = float(scores[j]) if self.order == 2 else None
            self._record(trace, t, stats, step, fwd_so, prev_step, prev_curv)
            w = w + step
            prev_step = step
            prev_curv = float(h_diag[j]) if self.order == 2 else None
            steps_done = t + 1
        return AttackResult(
            w_star=WeightVector(w, integral=True),
            relaxed_w=None,
            trace=tuple(trace),
            seeds=(seed,),
            n_iterations=steps_done,
            stop_reason=reason,
            method=self._method_name,
        )


METHODS = {
    "sgd_r2": SgdRelaxationAttack,
    "adam_r2": AdamRelaxationAttack,
    "second_order_r2": SecondOrderRelaxationAttack,
    "fgsm": FgsmAttack,
    "iscd_1o": lambda **kw: CoordinateDescentAttack(order=1, **kw),
    "iscd_2o": lambda **kw: CoordinateDescentAttack(order=2, **kw),
}


def make_attack(method: str, **kwargs) -> BasePoisoningAttack:
    """Build an attack estimator from its config-file method token."""
    try:
        factory = METHODS[method]
    except KeyError:
        raise ValueError(
            f"unknown attack method {method!r}; expected one of {sorted(METHODS)}"
        ) from None
    return factory(**kwargs)
