"""Shared domain types: datasets, attack weight vectors, budgets, models, seeds.

Weight semantics: an attack on an n-row dataset is a length-n vector of
nonnegative weights, where ``w[i] == 0`` deletes row i, ``w[i] == k`` counts it
k times (k - 1 extra copies), and ``w[i] == 1`` leaves it untouched.  The
continuous relaxation uses real weights; final attacks are integral.
"""

from __future__ import annotations

import csv
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Budget",
    "Dataset",
    "Model",
    "RngSeed",
    "WeightVector",
    "load_dataset_csv",
    "loglik_matrix",
    "weighted_logjoint",
]

INTEGRALITY_TOL = 1e-9


def _readonly(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class RngSeed:
    """Seed plus stream id; identical pairs reproduce identical draws.

    Derived streams are obtained with :meth:`child`, which maps (parent, k)
    injectively onto a fresh stream id, so concurrent consumers never share a
    stream.  Every attack run records the seeds it consumed so results can be
    replayed bit for bit.
    """

    seed: int
    stream_id: int = 0

    def __post_init__(self):
        if self.seed < 0 or self.stream_id < 0:
            raise ValueError("seed and stream_id must be nonnegative")

    def generator(self) -> np.random.Generator:
        entropy = (int(self.seed), int(self.stream_id))
        return np.random.default_rng(np.random.SeedSequence(entropy))

    def child(self, k: int) -> "RngSeed":
        # Injective for 0 <= k < 2**20 - 1, far above any iteration count here.
        if k < 0:
            raise ValueError("child index must be nonnegative")
        return RngSeed(self.seed, self.stream_id * (1 << 20) + int(k) + 1)

    def to_dict(self) -> dict:
        return {"seed": int(self.seed), "stream_id": int(self.stream_id)}


@dataclass(frozen=True)
class Dataset:
    """Immutable n x p design matrix plus optional length-n response.

    Rows are the unit of deletion and replication.  Entries must be finite;
    missing values are rejected at construction, never imputed.
    """

    x: np.ndarray
    y: np.ndarray | None = None
    column_names: tuple[str, ...] | None = None

    def __post_init__(self):
        x = np.atleast_2d(np.asarray(self.x, dtype=float))
        if x.ndim != 2 or x.shape[0] < 1:
            raise ValueError("x must be a matrix with at least one row")
        if not np.all(np.isfinite(x)):
            raise ValueError("x contains non-finite entries")
        object.__setattr__(self, "x", _readonly(x))
        if self.y is not None:
            y = np.asarray(self.y, dtype=float).ravel()
            if y.shape[0] != x.shape[0]:
                raise ValueError("y length does not match number of rows")
            if not np.all(np.isfinite(y)):
                raise ValueError("y contains non-finite entries")
            object.__setattr__(self, "y", _readonly(y))
        if self.column_names is not None:
            names = tuple(str(c) for c in self.column_names)
            if len(names) != x.shape[1]:
                raise ValueError("column_names length does not match columns")
            object.__setattr__(self, "column_names", names)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def p(self) -> int:
        return self.x.shape[1]

    def require_response(self) -> np.ndarray:
        if self.y is None:
            raise ValueError("dataset has no response vector")
        return self.y

    def with_response(self, y) -> "Dataset":
        return Dataset(self.x, y, self.column_names)

    def replicate_rows(self, counts) -> "Dataset":
        """Materialize an integral weight vector: drop zero rows, copy others."""
        counts = np.asarray(counts)
        if counts.shape != (self.n,):
            raise ValueError("counts length does not match number of rows")
        reps = np.rint(counts).astype(int)
        if np.any(np.abs(counts - reps) > INTEGRALITY_TOL) or np.any(reps < 0):
            raise ValueError("counts must be nonnegative integers")
        idx = np.repeat(np.arange(self.n), reps)
        if idx.size == 0:
            raise ValueError("all rows deleted; empty datasets are not allowed")
        y = self.y[idx] if self.y is not None else None
        return Dataset(self.x[idx], y, self.column_names)


@dataclass(frozen=True)
class WeightVector:
    """Length-n nonnegative attack vector, real (relaxed) or integral (final).

    Integrality is a checked flag rather than a separate type so the relaxed
    and integral phases share code.
    """

    values: np.ndarray
    integral: bool = False

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).ravel()
        if v.size < 1:
            raise ValueError("weight vector must be nonempty")
        if not np.all(np.isfinite(v)):
            raise ValueError("weights contain non-finite entries")
        if np.min(v) < -1e-9:
            raise ValueError("weights must be nonnegative")
        v = np.maximum(v, 0.0)
        if self.integral:
            r = np.rint(v)
            if np.max(np.abs(v - r)) > INTEGRALITY_TOL:
                raise ValueError("weights flagged integral are not whole numbers")
            v = r
        object.__setattr__(self, "values", _readonly(v))

    @classmethod
    def ones(cls, n: int) -> "WeightVector":
        return cls(np.ones(n), integral=True)

    @property
    def n(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class Budget:
    """Attack budget: at most ``b_max`` total manipulations (L1 distance of the
    weights from all-ones) and at most ``l_max`` copies of any single row."""

    b_max: int
    l_max: int

    def __post_init__(self):
        if int(self.b_max) != self.b_max or self.b_max < 0:
            raise ValueError("b_max must be a nonnegative integer")
        if int(self.l_max) != self.l_max or self.l_max < 1:
            raise ValueError("l_max must be a positive integer")
        object.__setattr__(self, "b_max", int(self.b_max))
        object.__setattr__(self, "l_max", int(self.l_max))


class Model(ABC):
    """Bayesian model over a dataset: per-row log-likelihoods and a log-prior.

    Parameters live on an unconstrained scale (positive quantities are
    log-transformed, with the Jacobian folded into ``logprior``), so the same
    vector feeds gradient-based samplers and exact samplers alike.  All
    evaluations are pure and safe to call concurrently.
    """

    @property
    @abstractmethod
    def dim(self) -> int:
        """Dimension of the parameter vector."""

    @property
    def param_names(self) -> tuple[str, ...]:
        return tuple(f"theta{i}" for i in range(self.dim))

    @abstractmethod
    def loglik_rows(self, data: Dataset, theta: np.ndarray) -> np.ndarray:
        """Vector of log-likelihood contributions, one per dataset row."""

    @abstractmethod
    def logprior(self, theta: np.ndarray) -> float:
        """Log-prior density at theta, including change-of-variable terms."""

    def loglik_row(self, data: Dataset, i: int, theta: np.ndarray) -> float:
        return float(self.loglik_rows(data, theta)[i])

    def loglik_matrix(self, data: Dataset, thetas: np.ndarray) -> np.ndarray:
        """Default row-by-row evaluation; models override with batched math."""
        thetas = _check_thetas(self, thetas)
        return np.stack([self.loglik_rows(data, t) for t in thetas])

    def grad_logprior(self, theta: np.ndarray) -> np.ndarray:
        raise NotImplementedError(f"{type(self).__name__} has no prior gradient")

    def grad_loglik_weighted(self, data: Dataset, w: np.ndarray, theta: np.ndarray) -> np.ndarray:
        raise NotImplementedError(f"{type(self).__name__} has no likelihood gradient")

    def grad_logjoint(self, data: Dataset, w, theta: np.ndarray) -> np.ndarray:
        w = _weight_values(w, data.n)
        return self.grad_loglik_weighted(data, w, theta) + self.grad_logprior(theta)

    def logjoint_closure(self, data: Dataset, w):
        """Return ``theta -> (logjoint, grad)`` with row weights baked in.

        Models with sufficient statistics override this to precompute weighted
        sums once per weight vector, which is what makes gradient-based
        sampling affordable inside attack loops.
        """
        w = _weight_values(w, data.n)

        def value_and_grad(theta: np.ndarray):
            lp = float(w @ self.loglik_rows(data, theta)) + self.logprior(theta)
            return lp, self.grad_logjoint(data, w, theta)

        return value_and_grad

    def init_params(self, data: Dataset) -> np.ndarray:
        return np.zeros(self.dim)

    def simulate(self, data: Dataset, theta: np.ndarray, seed: RngSeed) -> Dataset:
        """Draw a synthetic response from the likelihood at ``theta`` reusing
        the covariates of ``data``."""
        raise NotImplementedError(f"{type(self).__name__} cannot simulate data")


def _weight_values(w, n: int | None = None) -> np.ndarray:
    if isinstance(w, WeightVector):
        v = w.values
    else:
        v = np.asarray(w, dtype=float).ravel()
    if n is not None and v.shape[0] != n:
        raise ValueError(f"weight vector has length {v.shape[0]}, expected {n}")
    return v


def _check_thetas(model: Model, thetas) -> np.ndarray:
    arr = np.atleast_2d(np.asarray(thetas, dtype=float))
    if arr.shape[1] != model.dim:
        raise ValueError(
            f"parameter dimension {arr.shape[1]} does not match model dim {model.dim}"
        )
    return arr


def loglik_matrix(model: Model, data: Dataset, thetas) -> np.ndarray:
    """Evaluate per-row log-likelihoods for a batch of parameter vectors.

    Returns an S x n matrix whose (j, i) entry is the log-likelihood of row i
    at the j-th parameter vector.  Samples are rows so that gradient
    estimation reduces to column means.
    """
    arr = _check_thetas(model, thetas)
    out = model.loglik_matrix(data, arr)
    if out.shape != (arr.shape[0], data.n):
        raise ValueError("model returned a log-likelihood matrix of wrong shape")
    if not np.all(np.isfinite(out)):
        raise ValueError("non-finite log-likelihood; parameter outside support")
    return out


def weighted_logjoint(model: Model, data: Dataset, w, theta: np.ndarray) -> float:
    """Unnormalized log-density of the weighted posterior at ``theta``:
    sum_i w[i] * loglik(row i) + logprior."""
    wv = _weight_values(w, data.n)
    lp = model.logprior(np.asarray(theta, dtype=float))
    if not np.isfinite(lp):
        raise ValueError("log-prior is not finite at theta")
    return float(wv @ model.loglik_rows(data, theta) + lp)


def load_dataset_csv(path, response: str | None = None) -> Dataset:
    """Load a dataset from a CSV file with a header row.

    ``response`` names the column used as the response vector; remaining
    columns form the design matrix in file order.  Any missing or non-numeric
    cell is a hard error.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ValueError(f"{path}:{lineno}: expected {len(header)} fields")
            vals = []
            for name, cell in zip(header, row):
                cell = cell.strip()
                if cell == "":
                    raise ValueError(f"{path}:{lineno}: missing value in column {name!r}")
                try:
                    v = float(cell)
                except ValueError:
                    raise ValueError(
                        f"{path}:{lineno}: non-numeric value {cell!r} in column {name!r}"
                    ) from None
                if not np.isfinite(v):
                    raise ValueError(f"{path}:{lineno}: non-finite value in column {name!r}")
                vals.append(v)
            rows.append(vals)
    if not rows:
        raise ValueError(f"{path}: no data rows")
    table = np.asarray(rows, dtype=float)
    if response is None:
        return Dataset(table, column_names=tuple(header))
    if response not in header:
        raise ValueError(f"{path}: response column {response!r} not in header")
    ridx = header.index(response)
    keep = [j for j in range(len(header)) if j != ridx]
    return Dataset(
        table[:, keep],
        y=table[:, ridx],
        column_names=tuple(header[j] for j in keep),
    )
