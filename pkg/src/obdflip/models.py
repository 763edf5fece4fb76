"""Group samples, fitted linear models, and unit rescaling.

The decomposition machinery works on one linear model per group,

    E[Y | X] = alpha + X @ beta,

together with that group's covariate mean vector mu. Models can be fitted
from data (:func:`fit_ols`) or written down directly (population mode).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateMeansError,
    DimensionMismatchError,
    RankDeficientError,
    TooFewRowsError,
)

# designs with 2-norm condition number at or above this are rejected
CONDITION_LIMIT = 1e10


def _readonly(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=float, copy=True)
    out.flags.writeable = False
    return out


def _set(obj, **fields) -> None:
    for name, value in fields.items():
        object.__setattr__(obj, name, value)


@dataclass(frozen=True)
class GroupSample:
    """Observations for one group: an (n, d) covariate matrix and n outcomes.

    Arrays are copied and frozen at construction, so instances are safe to
    share across threads. All entries must be finite.
    """

    label: str
    covariates: np.ndarray
    outcome: np.ndarray

    def __post_init__(self):
        x = np.array(self.covariates, dtype=float, copy=True)
        y = np.array(self.outcome, dtype=float, copy=True)
        if x.ndim != 2:
            raise DimensionMismatchError(
                f"covariates must be 2-dimensional, got ndim={x.ndim}"
            )
        if y.ndim != 1:
            raise DimensionMismatchError(
                f"outcome must be 1-dimensional, got ndim={y.ndim}"
            )
        if x.shape[0] != y.shape[0]:
            raise DimensionMismatchError(
                f"covariates have {x.shape[0]} rows but outcome has {y.shape[0]}"
            )
        if x.shape[1] < 1:
            raise DimensionMismatchError("need at least one covariate column")
        if not (np.isfinite(x).all() and np.isfinite(y).all()):
            raise ValueError(f"group {self.label!r}: non-finite entries in sample")
        x.flags.writeable = False
        y.flags.writeable = False
        _set(self, covariates=x, outcome=y)

    @property
    def n_rows(self) -> int:
        return self.covariates.shape[0]

    @property
    def n_covariates(self) -> int:
        return self.covariates.shape[1]


@dataclass(frozen=True)
class GroupModel:
    """Linear model and covariate means for one group."""

    label: str
    alpha: float
    beta: np.ndarray
    mu: np.ndarray

    def __post_init__(self):
        beta = _readonly(np.atleast_1d(self.beta))
        mu = _readonly(np.atleast_1d(self.mu))
        if beta.ndim != 1 or mu.ndim != 1:
            raise DimensionMismatchError("beta and mu must be vectors")
        if beta.shape != mu.shape:
            raise DimensionMismatchError(
                f"beta has length {beta.shape[0]} but mu has length {mu.shape[0]}"
            )
        alpha = float(self.alpha)
        if not (np.isfinite(beta).all() and np.isfinite(mu).all() and np.isfinite(alpha)):
            raise ValueError(f"group {self.label!r}: non-finite model parameters")
        _set(self, alpha=alpha, beta=beta, mu=mu)

    @property
    def n_covariates(self) -> int:
        return self.beta.shape[0]

    @property
    def mean_outcome(self) -> float:
        """Model-implied mean outcome alpha + mu @ beta."""
        return self.alpha + float(self.mu @ self.beta)


@dataclass(frozen=True)
class UnitTransform:
    """Per-coordinate affine change of covariate units x -> (x - shift) / scale."""

    shift: np.ndarray
    scale: np.ndarray

    def __post_init__(self):
        shift = _readonly(np.atleast_1d(self.shift))
        scale = _readonly(np.atleast_1d(self.scale))
        if shift.shape != scale.shape or shift.ndim != 1:
            raise DimensionMismatchError("shift and scale must be vectors of equal length")
        if np.any(scale == 0.0):
            raise DegenerateMeansError(np.flatnonzero(scale == 0.0))
        _set(self, shift=shift, scale=scale)

    def apply(self, x: np.ndarray) -> np.ndarray:
        return (np.asarray(x, dtype=float) - self.shift) / self.scale


def fit_ols(sample: GroupSample) -> GroupModel:
    """Least-squares fit of the outcome on the covariates plus an intercept.

    Solved through an orthogonal decomposition of the design matrix (numpy's
    SVD-based ``lstsq``), never the normal equations. The design must have
    full column rank with 2-norm condition number below ``CONDITION_LIMIT``;
    constant covariate columns (which duplicate the intercept) are rejected
    explicitly.

    Parameters
    ----------
    sample : GroupSample
        Needs at least d + 2 rows for d covariates.

    Returns
    -------
    GroupModel
        Fitted intercept and slopes, with ``mu`` set to the sample's
        covariate column means.
    """
    x, y = sample.covariates, sample.outcome
    n, d = x.shape
    if n < d + 2:
        raise TooFewRowsError(
            f"group {sample.label!r}: {n} rows cannot support {d} covariates "
            f"plus intercept (need at least {d + 2})"
        )
    spans = np.ptp(x, axis=0)
    if np.any(spans == 0.0):
        cols = np.flatnonzero(spans == 0.0)
        raise RankDeficientError(
            f"group {sample.label!r}: covariate column(s) {list(cols)} are "
            "constant and collinear with the intercept"
        )
    design = np.column_stack([np.ones(n), x])
    coef, _, rank, singular = np.linalg.lstsq(design, y, rcond=None)
    condition = np.inf if singular[-1] == 0.0 else float(singular[0] / singular[-1])
    if rank < d + 1 or not condition < CONDITION_LIMIT:
        raise RankDeficientError(
            f"group {sample.label!r}: design condition number {condition:.3e} "
            f"(limit {CONDITION_LIMIT:.0e}) or rank {rank} < {d + 1}"
        )
    return GroupModel(
        label=sample.label,
        alpha=float(coef[0]),
        beta=coef[1:],
        mu=x.mean(axis=0),
    )


def standardize_units(mu_h: np.ndarray, mu_k: np.ndarray) -> UnitTransform:
    """Transform sending group K's mean to the origin and group H's to ones.

    In the rescaled units every covariate gap is exactly one, which is the
    normalization the parameter-space volume results are stated in. Requires
    the means to differ in every coordinate.
    """
    mu_h = np.atleast_1d(np.asarray(mu_h, dtype=float))
    mu_k = np.atleast_1d(np.asarray(mu_k, dtype=float))
    if mu_h.shape != mu_k.shape:
        raise DimensionMismatchError("mean vectors must have equal length")
    return UnitTransform(shift=mu_k, scale=mu_h - mu_k)


def transform_model(model: GroupModel, units: UnitTransform) -> GroupModel:
    """Re-express a model in transformed covariate units.

    Slopes pick up the scale, the intercept absorbs the shift, and the mean
    vector moves with the data, so fitted values (and therefore every
    decomposition component) are unchanged.
    """
    if units.scale.shape != model.beta.shape:
        raise DimensionMismatchError(
            f"transform has {units.scale.shape[0]} coordinates but model has "
            f"{model.beta.shape[0]}"
        )
    return GroupModel(
        label=model.label,
        alpha=model.alpha + float(model.beta @ units.shift),
        beta=model.beta * units.scale,
        mu=(model.mu - units.shift) / units.scale,
    )


def transform_sample(sample: GroupSample, units: UnitTransform) -> GroupSample:
    """Apply a unit transform to a sample's covariates (outcome untouched)."""
    if units.scale.shape[0] != sample.n_covariates:
        raise DimensionMismatchError(
            f"transform has {units.scale.shape[0]} coordinates but sample has "
            f"{sample.n_covariates}"
        )
    return GroupSample(
        label=sample.label,
        covariates=units.apply(sample.covariates),
        outcome=sample.outcome,
    )


def out_of_unit_interval_share(sample: GroupSample, model: GroupModel) -> float | None:
    """Share of fitted values outside [0, 1] when the outcome is binary.

    Linear fits to 0/1 outcomes are left unclipped; this diagnostic reports
    how often the fitted probabilities escape the unit interval. Returns
    None for non-binary outcomes.
    """
    values = np.unique(sample.outcome)
    if not np.isin(values, (0.0, 1.0)).all():
        return None
    fitted = model.alpha + sample.covariates @ model.beta
    return float(np.mean((fitted < 0.0) | (fitted > 1.0)))
