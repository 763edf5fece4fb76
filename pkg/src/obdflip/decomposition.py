"""Two-group mean-gap decomposition under either reference model.

For groups H and K with linear models (alpha_g, beta_g) and covariate means
mu_g, the mean outcome gap

    gap = E_H[Y] - E_K[Y] = (alpha_H - alpha_K) + mu_H @ beta_H - mu_K @ beta_K

splits into an explained part (covariate composition priced at the reference
group's coefficients) and an unexplained remainder. The split depends on
which group is the reference:

    reference H:  explained = (mu_H - mu_K) @ beta_H
                  unexplained = mu_K @ (beta_H - beta_K) + (alpha_H - alpha_K)
    reference K:  explained = (mu_H - mu_K) @ beta_K
                  unexplained = mu_H @ (beta_H - beta_K) + (alpha_H - alpha_K)

Both splits are always reported in H-minus-K orientation; swapping the
reference never reorients the gap. The two explained parts differ by exactly
(mu_H - mu_K) @ (beta_H - beta_K), and the unexplained parts by its negative.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError
from .models import GroupModel


@dataclass(frozen=True)
class DecompositionResult:
    """One reference's split of the H-minus-K mean gap."""

    reference: str
    explained: float
    unexplained: float
    total_gap: float
    counterfactual_mean: float


@dataclass(frozen=True)
class DualDecomposition:
    """The same gap split under both references."""

    by_h: DecompositionResult
    by_k: DecompositionResult

    @property
    def total_gap(self) -> float:
        return self.by_h.total_gap


def _check_pair(model_h: GroupModel, model_k: GroupModel) -> None:
    if model_h.beta.shape != model_k.beta.shape:
        raise DimensionMismatchError(
            f"models disagree on covariate count: {model_h.beta.shape[0]} vs "
            f"{model_k.beta.shape[0]}"
        )
    if model_h.label == model_k.label:
        raise ValueError(f"groups must carry distinct labels, both are {model_h.label!r}")


def counterfactual_mean(model_of: GroupModel, means_from: GroupModel) -> float:
    """Mean outcome under one group's model at another group's composition,
    alpha_g + mu_g' @ beta_g."""
    if model_of.beta.shape != means_from.mu.shape:
        raise DimensionMismatchError(
            f"model has {model_of.beta.shape[0]} covariates but means vector "
            f"has {means_from.mu.shape[0]}"
        )
    return model_of.alpha + float(means_from.mu @ model_of.beta)


def decompose(model_h: GroupModel, model_k: GroupModel, reference: str) -> DecompositionResult:
    """Split the H-minus-K mean gap using one group's coefficients as reference.

    Parameters
    ----------
    model_h, model_k : GroupModel
        The two groups. The gap is always oriented H minus K.
    reference : str
        Label of the group whose coefficients price the composition
        difference; must equal one model's label.
    """
    _check_pair(model_h, model_k)
    if reference not in (model_h.label, model_k.label):
        raise ValueError(
            f"reference {reference!r} matches neither group "
            f"({model_h.label!r}, {model_k.label!r})"
        )
    dmu = model_h.mu - model_k.mu
    dbeta = model_h.beta - model_k.beta
    dalpha = model_h.alpha - model_k.alpha
    total = dalpha + float(model_h.mu @ model_h.beta) - float(model_k.mu @ model_k.beta)
    if reference == model_h.label:
        explained = float(dmu @ model_h.beta)
        unexplained = float(model_k.mu @ dbeta) + dalpha
        counterfactual = counterfactual_mean(model_h, model_k)
    else:
        explained = float(dmu @ model_k.beta)
        unexplained = float(model_h.mu @ dbeta) + dalpha
        counterfactual = counterfactual_mean(model_k, model_h)
    return DecompositionResult(
        reference=reference,
        explained=explained,
        unexplained=unexplained,
        total_gap=total,
        counterfactual_mean=counterfactual,
    )


def decompose_both(model_h: GroupModel, model_k: GroupModel) -> DualDecomposition:
    """Both reference choices at once; the total gap is shared bit-for-bit."""
    by_h = decompose(model_h, model_k, model_h.label)
    by_k = decompose(model_h, model_k, model_k.label)
    return DualDecomposition(by_h=by_h, by_k=by_k)


def per_covariate_explained(
    model_h: GroupModel, model_k: GroupModel, reference: str
) -> np.ndarray:
    """Coordinate-wise contributions (mu_H - mu_K)_j * beta_ref_j.

    These sum to the explained component under the chosen reference. They are
    a diagnostic only: unlike the totals they are not invariant to affine
    changes of covariate units.
    """
    _check_pair(model_h, model_k)
    if reference == model_h.label:
        ref_beta = model_h.beta
    elif reference == model_k.label:
        ref_beta = model_k.beta
    else:
        raise ValueError(
            f"reference {reference!r} matches neither group "
            f"({model_h.label!r}, {model_k.label!r})"
        )
    return (model_h.mu - model_k.mu) * ref_beta
