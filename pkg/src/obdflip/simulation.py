"""Synthetic data processes and parameter-space draws.

Three generators live here:

* :class:`LinearDGP` draws (X, Y) from a Gaussian linear model per group,
  including the two-group blood-pressure example with known population
  parameters used throughout the tests and docs.
* :class:`OvbDGP` draws from a structural model with an omitted mediator Z,
  so the short regression of Y on X alone has composed coefficients
  alpha = omega + zeta @ gamma, beta = theta + Psi' @ gamma.
* :func:`draw_uniform_params` samples whole model pairs uniformly from a
  parameter cube, the measure under which flip prevalence is computed. Draws
  are keyed by (seed, index) on a counter-based stream, so draw i is the
  same bits whether drawn alone or inside any chunked sweep.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, NonPositiveParameterError
from .models import GroupModel, GroupSample
from .rng import (
    STREAM_PARAMS,
    STREAM_SIMULATION,
    generator,
    padded_stride,
    uniform_block,
)


@dataclass(frozen=True)
class LinearDGP:
    """Gaussian linear data process for one group."""

    mu_x: np.ndarray
    sigma_x: np.ndarray
    alpha: float
    beta: np.ndarray
    noise_sd: float

    def __post_init__(self):
        mu_x = np.atleast_1d(np.asarray(self.mu_x, dtype=float))
        sigma_x = np.atleast_1d(np.asarray(self.sigma_x, dtype=float))
        beta = np.atleast_1d(np.asarray(self.beta, dtype=float))
        if not (mu_x.shape == sigma_x.shape == beta.shape) or mu_x.ndim != 1:
            raise DimensionMismatchError("mu_x, sigma_x and beta must be vectors of one length")
        if np.any(sigma_x <= 0.0):
            raise NonPositiveParameterError("sigma_x entries must be positive")
        if not self.noise_sd > 0.0:
            raise NonPositiveParameterError(f"noise_sd must be positive, got {self.noise_sd}")
        object.__setattr__(self, "mu_x", mu_x)
        object.__setattr__(self, "sigma_x", sigma_x)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "noise_sd", float(self.noise_sd))

    @property
    def n_covariates(self) -> int:
        return self.mu_x.shape[0]

    def population_model(self, label: str) -> GroupModel:
        return GroupModel(label=label, alpha=self.alpha, beta=self.beta, mu=self.mu_x)


def gen_linear_group(
    dgp: LinearDGP, n: int, seed: int, label: str = "g", stream: int = 0
) -> GroupSample:
    """Draw n rows from a linear process; deterministic given (seed, stream)."""
    if n < 1:
        raise NonPositiveParameterError(f"n must be positive, got {n}")
    rng = generator(seed, STREAM_SIMULATION, stream)
    x = dgp.mu_x + dgp.sigma_x * rng.standard_normal((n, dgp.n_covariates))
    y = dgp.alpha + x @ dgp.beta + dgp.noise_sd * rng.standard_normal(n)
    return GroupSample(label=label, covariates=x, outcome=y)


def gen_two_groups(
    dgp_h: LinearDGP,
    dgp_k: LinearDGP,
    n_h: int,
    n_k: int,
    seed: int,
    labels: tuple[str, str] = ("H", "K"),
) -> tuple[GroupSample, GroupSample]:
    """Both groups from one seed, on separate streams."""
    sample_h = gen_linear_group(dgp_h, n_h, seed, label=labels[0], stream=0)
    sample_k = gen_linear_group(dgp_k, n_k, seed, label=labels[1], stream=1)
    return sample_h, sample_k


def sbp_bmi_dgps() -> tuple[LinearDGP, LinearDGP]:
    """Textbook two-group example: systolic blood pressure regressed on BMI.

    Group H has the lower mean BMI (25 vs 27) but the higher intercept; the
    slopes differ enough that the unexplained component changes sign with
    the reference group while the total gap is -2.4 either way.
    """
    dgp_h = LinearDGP(mu_x=[25.0], sigma_x=[4.0], alpha=110.4, beta=[1.0], noise_sd=5.0)
    dgp_k = LinearDGP(mu_x=[27.0], sigma_x=[4.0], alpha=100.0, beta=[1.4], noise_sd=5.0)
    return dgp_h, dgp_k


def sbp_bmi_models() -> tuple[GroupModel, GroupModel]:
    """Population models of the blood-pressure example (no sampling noise)."""
    dgp_h, dgp_k = sbp_bmi_dgps()
    return dgp_h.population_model("H"), dgp_k.population_model("K")


@dataclass(frozen=True)
class OvbDGP:
    """Structural process Y = omega + X theta + Z gamma + noise with the
    mediator Z = zeta + Psi X + noise omitted from the fitted regression."""

    omega: float
    theta: np.ndarray       # (d,)
    gamma: np.ndarray       # (p,)
    zeta: np.ndarray        # (p,)
    psi: np.ndarray         # (p, d)
    mu_x: np.ndarray        # (d,)
    sigma_x: np.ndarray     # (d,)
    z_noise_sd: float
    y_noise_sd: float

    def __post_init__(self):
        theta = np.atleast_1d(np.asarray(self.theta, dtype=float))
        gamma = np.atleast_1d(np.asarray(self.gamma, dtype=float))
        zeta = np.atleast_1d(np.asarray(self.zeta, dtype=float))
        psi = np.atleast_2d(np.asarray(self.psi, dtype=float))
        mu_x = np.atleast_1d(np.asarray(self.mu_x, dtype=float))
        sigma_x = np.atleast_1d(np.asarray(self.sigma_x, dtype=float))
        d, p = theta.shape[0], gamma.shape[0]
        if zeta.shape != (p,) or psi.shape != (p, d):
            raise DimensionMismatchError(
                f"zeta must be ({p},) and psi ({p}, {d}); got {zeta.shape} and {psi.shape}"
            )
        if mu_x.shape != (d,) or sigma_x.shape != (d,):
            raise DimensionMismatchError(f"mu_x and sigma_x must be ({d},)")
        if np.any(sigma_x <= 0.0):
            raise NonPositiveParameterError("sigma_x entries must be positive")
        if not (self.z_noise_sd > 0.0 and self.y_noise_sd > 0.0):
            raise NonPositiveParameterError("noise scales must be positive")
        for name, value in [
            ("theta", theta), ("gamma", gamma), ("zeta", zeta), ("psi", psi),
            ("mu_x", mu_x), ("sigma_x", sigma_x),
        ]:
            object.__setattr__(self, name, value)
        object.__setattr__(self, "omega", float(self.omega))


def compose_short_params(dgp: OvbDGP) -> tuple[float, np.ndarray]:
    """Intercept and slopes of the regression of Y on X with Z omitted:
    alpha = omega + zeta @ gamma, beta = theta + psi' @ gamma."""
    alpha = dgp.omega + float(dgp.zeta @ dgp.gamma)
    beta = dgp.theta + dgp.psi.T @ dgp.gamma
    return alpha, beta


@dataclass(frozen=True)
class OvbDeltas:
    """Between-group parameter differences of the composed short model.

    ``displayed_*`` are the additive decompositions
    dalpha = domega + dzeta @ dgamma and dbeta = dtheta + dpsi' @ dgamma,
    which drop the cross terms zeta_K @ dgamma + dzeta @ gamma_K (and the
    matrix analogue); ``exact_*`` difference the composed parameters
    directly. The two agree whenever group K's mediator structure vanishes
    (zeta_K = gamma_K = 0, psi_K = 0); ``*_discrepancy`` reports exact minus
    displayed.
    """

    displayed_delta_alpha: float
    displayed_delta_beta: np.ndarray
    exact_delta_alpha: float
    exact_delta_beta: np.ndarray
    alpha_discrepancy: float
    beta_discrepancy: np.ndarray


def ovb_deltas(dgp_h: OvbDGP, dgp_k: OvbDGP) -> OvbDeltas:
    """Both forms of (dalpha, dbeta) for two omitted-mediator processes."""
    if dgp_h.theta.shape != dgp_k.theta.shape or dgp_h.gamma.shape != dgp_k.gamma.shape:
        raise DimensionMismatchError("the two processes must share (d, p) shapes")
    dgamma = dgp_h.gamma - dgp_k.gamma
    displayed_alpha = (dgp_h.omega - dgp_k.omega) + float((dgp_h.zeta - dgp_k.zeta) @ dgamma)
    displayed_beta = (dgp_h.theta - dgp_k.theta) + (dgp_h.psi - dgp_k.psi).T @ dgamma
    alpha_h, beta_h = compose_short_params(dgp_h)
    alpha_k, beta_k = compose_short_params(dgp_k)
    exact_alpha = alpha_h - alpha_k
    exact_beta = beta_h - beta_k
    return OvbDeltas(
        displayed_delta_alpha=displayed_alpha,
        displayed_delta_beta=displayed_beta,
        exact_delta_alpha=exact_alpha,
        exact_delta_beta=exact_beta,
        alpha_discrepancy=exact_alpha - displayed_alpha,
        beta_discrepancy=exact_beta - displayed_beta,
    )


def gen_ovb_group(
    dgp: OvbDGP, n: int, seed: int, label: str = "g", stream: int = 0
) -> GroupSample:
    """Draw from the structural process, returning only (X, Y): the mediator
    is generated, shapes the outcome, and is then omitted."""
    if n < 1:
        raise NonPositiveParameterError(f"n must be positive, got {n}")
    rng = generator(seed, STREAM_SIMULATION, stream)
    d, p = dgp.theta.shape[0], dgp.gamma.shape[0]
    x = dgp.mu_x + dgp.sigma_x * rng.standard_normal((n, d))
    z = dgp.zeta + x @ dgp.psi.T + dgp.z_noise_sd * rng.standard_normal((n, p))
    y = (
        dgp.omega
        + x @ dgp.theta
        + z @ dgp.gamma
        + dgp.y_noise_sd * rng.standard_normal(n)
    )
    return GroupSample(label=label, covariates=x, outcome=y)


# ---------------------------------------------------------------------------
# uniform parameter-space draws


@dataclass(frozen=True)
class ParamBlock:
    """Vectorized batch of uniform parameter draws (one row per draw)."""

    beta_h: np.ndarray   # (m, d)
    beta_k: np.ndarray   # (m, d)
    alpha_h: np.ndarray  # (m,)
    alpha_k: np.ndarray  # (m,)
    mu_h: np.ndarray     # (m, d)
    mu_k: np.ndarray     # (m, d)


def param_stride(d: int, standardized: bool) -> int:
    """Doubles consumed per draw, padded to the generator's block size."""
    raw = 2 * d + 2 if standardized else 4 * d + 2
    return padded_stride(raw)


def _check_draw_args(d: int, half_width: float) -> None:
    if int(d) != d or d < 1:
        raise NonPositiveParameterError(f"d must be a positive integer, got {d!r}")
    if not half_width > 0.0:
        raise NonPositiveParameterError(f"half_width must be positive, got {half_width}")


def draw_param_block(
    d: int,
    half_width: float,
    standardized: bool,
    seed: int,
    start: int,
    count: int,
) -> ParamBlock:
    """Draws ``start .. start+count`` of the uniform parameter stream.

    Every coordinate of beta_H, beta_K, alpha_H, alpha_K (and, when not
    standardized, mu_H and mu_K) is U(-half_width, half_width). Standardized
    draws fix mu_K = 0 and mu_H = 1 so covariate gaps are exactly one. The
    layout is per-draw, so any chunking of the index range yields identical
    bits (see :mod:`obdflip.rng`).
    """
    _check_draw_args(d, half_width)
    stride = param_stride(d, standardized)
    raw = uniform_block(
        seed, STREAM_PARAMS, 0, start, count, stride, -half_width, half_width
    )
    beta_h = raw[:, 0:d]
    beta_k = raw[:, d : 2 * d]
    alpha_h = raw[:, 2 * d]
    alpha_k = raw[:, 2 * d + 1]
    if standardized:
        mu_h = np.ones((count, d))
        mu_k = np.zeros((count, d))
    else:
        mu_h = raw[:, 2 * d + 2 : 3 * d + 2]
        mu_k = raw[:, 3 * d + 2 : 4 * d + 2]
    return ParamBlock(
        beta_h=beta_h, beta_k=beta_k, alpha_h=alpha_h, alpha_k=alpha_k,
        mu_h=mu_h, mu_k=mu_k,
    )


def draw_uniform_params(
    d: int,
    half_width: float,
    standardized: bool,
    seed: int,
    index: int,
) -> tuple[GroupModel, GroupModel]:
    """Model pair number ``index`` of the uniform parameter stream."""
    block = draw_param_block(d, half_width, standardized, seed, index, 1)
    model_h = GroupModel(
        label="H", alpha=float(block.alpha_h[0]), beta=block.beta_h[0], mu=block.mu_h[0]
    )
    model_k = GroupModel(
        label="K", alpha=float(block.alpha_k[0]), beta=block.beta_k[0], mu=block.mu_k[0]
    )
    return model_h, model_k
