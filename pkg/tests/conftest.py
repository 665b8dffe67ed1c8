import sys
from pathlib import Path
from types import SimpleNamespace

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from bayespoison import (
    NigLinearModel,
    NigParams,
    RngSeed,
    SyntheticRegressionSpec,
    gen_synthetic_regression,
    nig_mean_shift_target,
)


@pytest.fixture(scope="session")
def linreg_instance():
    """The standard synthetic conjugate study: 100 rows, slope 0.3, noise 0.5,
    weak isotropic prior, target posterior with the slope mean zeroed.

    The dataset seed is frozen to a draw of typical attack difficulty (the
    achievable KL at budget 30 varies a lot across draws; this one sits at
    the median, matching the reported behavior of the setup).
    """
    spec = SyntheticRegressionSpec(n=100, beta0=0.5, beta1=0.3, noise_sd=0.5, seed=RngSeed(16))
    data = gen_synthetic_regression(spec)
    prior = NigParams(mu=np.zeros(2), lam=np.eye(2) / 100.0, a=2.0, b=2.0)
    model = NigLinearModel(prior)
    base = model.exact_posterior(data, np.ones(data.n))
    target = nig_mean_shift_target(base, 1, 0.0)
    return SimpleNamespace(data=data, prior=prior, model=model, base=base, target=target)


def small_nig_instance(n: int, seed: int, noise_sd: float = 0.5):
    spec = SyntheticRegressionSpec(n=n, beta0=0.5, beta1=0.3, noise_sd=noise_sd, seed=RngSeed(seed))
    data = gen_synthetic_regression(spec)
    prior = NigParams(mu=np.zeros(2), lam=np.eye(2) / 100.0, a=2.0, b=2.0)
    model = NigLinearModel(prior)
    base = model.exact_posterior(data, np.ones(n))
    return data, prior, model, base
