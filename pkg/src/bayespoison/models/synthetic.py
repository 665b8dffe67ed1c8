"""Seeded synthetic dataset generators for the bundled experiments.

Real benchmark datasets are not shipped; these generators produce instances
with the same shape so every experiment in the test suite is self-contained.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..core import Dataset, RngSeed

__all__ = [
    "SyntheticRegressionSpec",
    "gen_synthetic_regression",
    "gen_synthetic_logistic",
    "gen_two_group_regression",
]


@dataclass(frozen=True)
class SyntheticRegressionSpec:
    """Single-predictor linear data: intercept, slope, Gaussian noise."""

    n: int
    beta0: float = 0.5
    beta1: float = 0.3
    noise_sd: float = 0.5
    seed: RngSeed = field(default_factory=lambda: RngSeed(0, 0))

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.noise_sd < 0:
            raise ValueError("noise_sd must be nonnegative")


def gen_synthetic_regression(spec: SyntheticRegressionSpec) -> Dataset:
    """Standard-normal predictor with an explicit intercept column.

    The design matrix is ``[1, z]`` so conjugate priors act on both the
    intercept (coordinate 0) and the slope (coordinate 1).
    """
    rng = spec.seed.generator()
    z = rng.standard_normal(spec.n)
    y = spec.beta0 + spec.beta1 * z + spec.noise_sd * rng.standard_normal(spec.n)
    x = np.column_stack([np.ones(spec.n), z])
    return Dataset(x, y, column_names=("intercept", "x1"))


def gen_synthetic_logistic(
    n: int,
    coefs,
    feature_prob: float = 0.3,
    seed: RngSeed = RngSeed(0, 0),
) -> Dataset:
    """Binary presence/absence features with Bernoulli responses.

    Mirrors bag-of-words classification data: each feature is 1 with
    probability ``feature_prob`` and the label follows a logistic model with
    the given coefficients.
    """
    coefs = np.asarray(coefs, dtype=float).ravel()
    rng = seed.generator()
    x = (rng.uniform(size=(n, coefs.size)) < feature_prob).astype(float)
    eta = x @ coefs
    prob = 1.0 / (1.0 + np.exp(-eta))
    y = (rng.uniform(size=n) < prob).astype(float)
    names = tuple(f"word{i}" for i in range(coefs.size))
    return Dataset(x, y, column_names=names)


def gen_two_group_regression(
    n: int,
    beta0: float = 0.0,
    beta1: float = -4.0,
    noise_sd: float = 50.0,
    outlier_sd: float = 5000.0,
    outlier_frac: float = 0.015,
    treat_frac: float = 0.5,
    seed: RngSeed = RngSeed(0, 0),
) -> Dataset:
    """Randomized two-group outcome data with a contaminated noise tail.

    The single covariate is a 0/1 group indicator.  A small fraction of rows
    get noise drawn at ``outlier_sd`` instead of ``noise_sd``, reproducing the
    long-tailed outcome distributions that make treatment-effect inference
    fragile under row deletion and replication.
    """
    if not 0 < treat_frac < 1:
        raise ValueError("treat_frac must lie in (0, 1)")
    if not 0 <= outlier_frac < 1:
        raise ValueError("outlier_frac must lie in [0, 1)")
    rng = seed.generator()
    x = (rng.uniform(size=n) < treat_frac).astype(float)
    sd = np.where(rng.uniform(size=n) < outlier_frac, outlier_sd, noise_sd)
    y = beta0 + beta1 * x + sd * rng.standard_normal(n)
    return Dataset(x[:, None], y, column_names=("treatment",))
