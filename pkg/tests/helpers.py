"""Shared test utilities."""

import numpy as np

from obdflip import GroupModel


def make_models(alpha_h, beta_h, mu_h, alpha_k, beta_k, mu_k):
    return (
        GroupModel(label="H", alpha=alpha_h, beta=np.atleast_1d(beta_h),
                   mu=np.atleast_1d(mu_h)),
        GroupModel(label="K", alpha=alpha_k, beta=np.atleast_1d(beta_k),
                   mu=np.atleast_1d(mu_k)),
    )
