"""Concrete Bayesian models and synthetic data generators."""

from __future__ import annotations

import numpy as np

from ..core import Model
from .horseshoe import HorseshoeModel, HorseshoeSpec
from .logistic import LogisticModel
from .nig import (
    NigLinearModel,
    NigParams,
    beta_marginal_sd,
    beta_scale_sd,
    expected_row_loglik,
    inverse_gamma_kl,
    nig_exact_gradient,
    nig_exact_hessian,
    nig_kl,
    nig_logpdf,
    nig_weighted_posterior,
    pack_params,
    unpack_params,
)
from .studentt import StudentTPriorRegression
from .synthetic import (
    SyntheticRegressionSpec,
    gen_synthetic_logistic,
    gen_synthetic_regression,
    gen_two_group_regression,
)

__all__ = [
    "HorseshoeModel",
    "HorseshoeSpec",
    "LogisticModel",
    "NigLinearModel",
    "NigParams",
    "StudentTPriorRegression",
    "SyntheticRegressionSpec",
    "beta_marginal_sd",
    "beta_scale_sd",
    "expected_row_loglik",
    "gen_synthetic_logistic",
    "gen_synthetic_regression",
    "gen_two_group_regression",
    "inverse_gamma_kl",
    "make_model",
    "nig_exact_gradient",
    "nig_exact_hessian",
    "nig_kl",
    "nig_logpdf",
    "nig_weighted_posterior",
    "pack_params",
    "unpack_params",
]

MODEL_KINDS = ("nig_linreg", "horseshoe_linreg", "logistic", "microcredit_t")


def make_model(kind: str, spec: dict | None = None) -> Model:
    """Build a model from a config-style description.

    ``spec`` carries the kind-specific parameters:

    - ``nig_linreg``: ``mu`` (list), ``lam`` (matrix or scalar precision for
      an isotropic prior, with ``dims``), ``a``, ``b``.
    - ``horseshoe_linreg``: ``dims``, optional ``prior_scale_alpha``.
    - ``logistic``: ``dims``, optional ``prior_scale``.
    - ``microcredit_t``: optional ``prior_df``, ``prior_scale``.
    """
    spec = dict(spec or {})
    if kind == "nig_linreg":
        if "lam" in spec and np.ndim(spec["lam"]) == 0:
            dims = int(spec.get("dims") or len(spec.get("mu", [])) or 0)
            if dims < 1:
                raise ValueError("scalar precision needs dims or a mean vector")
            lam = float(spec["lam"]) * np.eye(dims)
        else:
            lam = np.asarray(spec["lam"], dtype=float)
        mu = np.asarray(spec.get("mu", np.zeros(lam.shape[0])), dtype=float)
        prior = NigParams(mu=mu, lam=lam, a=float(spec["a"]), b=float(spec["b"]))
        return NigLinearModel(prior)
    if kind == "horseshoe_linreg":
        return HorseshoeModel(
            HorseshoeSpec(
                dims=int(spec["dims"]),
                prior_scale_alpha=float(spec.get("prior_scale_alpha", 10.0)),
            )
        )
    if kind == "logistic":
        return LogisticModel(
            dim=int(spec["dims"]), prior_scale=float(spec.get("prior_scale", 10.0))
        )
    if kind == "microcredit_t":
        return StudentTPriorRegression(
            prior_df=float(spec.get("prior_df", 3.0)),
            prior_scale=float(spec.get("prior_scale", 1000.0)),
        )
    raise ValueError(f"unknown model kind {kind!r}; expected one of {MODEL_KINDS}")
