"""Poisoning attacks on Bayesian inference via data deletion and replication.

Given a dataset, a Bayesian model, a target posterior, and a manipulation
budget, the attacks in this package find an integer row-weight vector that
steers the tainted posterior toward the target, minimizing the forward KL
divergence using only sampling access to both distributions.
"""

from .attacks import (
    AdamRelaxationAttack,
    AttackResult,
    CoordinateDescentAttack,
    FgsmAttack,
    IterationRecord,
    METHODS,
    SecondOrderRelaxationAttack,
    SgdRelaxationAttack,
    make_attack,
    stopping_check,
)
from .backends import ExactConjugateBackend, SamplingBackend
from .core import (
    Budget,
    Dataset,
    Model,
    RngSeed,
    WeightVector,
    load_dataset_csv,
    loglik_matrix,
    weighted_logjoint,
)
from .estimators import (
    GradientEstimate,
    HessianEstimate,
    column_variances,
    forward_kl_gradient,
    hessian_estimate,
    reverse_kl_gradient,
    taylor_decrease,
)
from .feasible import FeasibleSet
from .metrics import (
    CrossEvalEntry,
    EvalReport,
    ManipulationStats,
    RoundingGap,
    cross_evaluate,
    evaluate_attack,
    gaussian_kl,
    manipulation_stats,
    posterior_summaries,
    rounding_gap,
    sample_induced_posterior,
)
from .models import (
    HorseshoeModel,
    HorseshoeSpec,
    LogisticModel,
    NigLinearModel,
    NigParams,
    StudentTPriorRegression,
    SyntheticRegressionSpec,
    beta_marginal_sd,
    beta_scale_sd,
    gen_synthetic_logistic,
    gen_synthetic_regression,
    gen_two_group_regression,
    make_model,
    nig_exact_gradient,
    nig_exact_hessian,
    nig_kl,
    nig_weighted_posterior,
)
from .samplers import (
    GaussianApprox,
    HmcConfig,
    HmcState,
    OptimizationError,
    SaddlePointError,
    SampleBatch,
    SamplerHealthError,
    laplace_approx,
    sample_nig_exact,
    sample_posterior,
)
from .targets import (
    Target,
    laplace_flip_target,
    nig_mean_shift_target,
    nig_params_target,
    nig_variance_scale_target,
    response_shift_target,
    synthetic_refit_target,
    target_log_ratio,
)

__version__ = "0.1.0"
