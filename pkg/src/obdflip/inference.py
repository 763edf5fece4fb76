"""Bootstrap standard errors and Wald tests for decomposition components.

Resampling is within-group: each replicate redraws rows with replacement
inside each group separately (group sizes fixed), refits both models, and
re-decomposes. Replicates are keyed by (seed, replicate index) on separate
counter-based streams, so results do not depend on evaluation order and any
replicate can be reproduced in isolation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .decomposition import DualDecomposition, decompose_both
from .errors import (
    ObdflipError,
    PointFitFailedError,
    TooManyFailedReplicatesError,
    ZeroStandardError,
)
from .models import GroupSample, fit_ols
from .rng import STREAM_BOOTSTRAP, generator

DEFAULT_REPLICATES = 1000
# a run fails if more than this share of replicates cannot be fitted
MAX_FAILED_SHARE = 0.05

_STAR_THRESHOLDS = ((0.01, "***"), (0.05, "**"), (0.10, "*"))


def wald_p(estimate: float, standard_error: float) -> float:
    """Two-sided normal p-value for estimate / standard_error."""
    if not standard_error > 0.0 or not math.isfinite(standard_error):
        raise ZeroStandardError(
            f"standard error must be positive and finite, got {standard_error!r}"
        )
    z = abs(estimate) / standard_error
    return math.erfc(z / math.sqrt(2.0))


def significance_stars(p_value: float) -> str:
    """'***' below 0.01, '**' below 0.05, '*' below 0.10, else ''."""
    if not 0.0 <= p_value <= 1.0:
        raise ValueError(f"p-value out of [0, 1]: {p_value!r}")
    for threshold, stars in _STAR_THRESHOLDS:
        if p_value < threshold:
            return stars
    return ""


@dataclass(frozen=True)
class ComponentStats:
    """Point estimate with bootstrap spread and Wald test."""

    estimate: float
    bootstrap_mean: float
    standard_error: float
    p_value: float
    stars: str


@dataclass(frozen=True)
class ReferenceStats:
    explained: ComponentStats
    unexplained: ComponentStats


@dataclass(frozen=True)
class BootstrapSummary:
    """Dual decomposition with bootstrap inference attached.

    ``replicate_components`` holds the kept replicates' (explained_H,
    unexplained_H, explained_K, unexplained_K, total_gap) rows; it is kept
    for diagnostics and is not serialized.
    """

    point: DualDecomposition
    n_replicates: int
    n_failed: int
    seed: int
    by_h: ReferenceStats
    by_k: ReferenceStats
    total_gap: ComponentStats
    replicate_components: np.ndarray


def _component_stats(estimate: float, draws: np.ndarray) -> ComponentStats:
    se = float(np.std(draws, ddof=1))
    if se > 0.0:
        p = wald_p(estimate, se)
    else:
        # all replicates identical: the Wald limit is degenerate
        p = 1.0 if estimate == 0.0 else 0.0
    return ComponentStats(
        estimate=estimate,
        bootstrap_mean=float(np.mean(draws)),
        standard_error=se,
        p_value=p,
        stars=significance_stars(p),
    )


def _resample(sample: GroupSample, rng: np.random.Generator) -> GroupSample:
    rows = rng.integers(0, sample.n_rows, size=sample.n_rows)
    return GroupSample(
        label=sample.label,
        covariates=sample.covariates[rows],
        outcome=sample.outcome[rows],
    )


def bootstrap_obd(
    sample_h: GroupSample,
    sample_k: GroupSample,
    n_replicates: int = DEFAULT_REPLICATES,
    seed: int = 0,
) -> BootstrapSummary:
    """Decompose with within-group bootstrap inference.

    Parameters
    ----------
    sample_h, sample_k : GroupSample
        The two groups; the gap is oriented H minus K.
    n_replicates : int
        Bootstrap replicate count, at least 100.
    seed : int
        Stream seed; replicate b draws from the (seed, b) stream, so the
        summary is identical however replicates are scheduled.

    Raises
    ------
    PointFitFailedError
        If the full-sample fit of either group fails.
    TooManyFailedReplicatesError
        If more than 5% of replicates fail to fit. Failed replicates below
        that are dropped and counted in ``n_failed``.
    """
    if n_replicates < 100:
        raise ValueError(f"need at least 100 replicates, got {n_replicates}")
    try:
        model_h = fit_ols(sample_h)
        model_k = fit_ols(sample_k)
    except ObdflipError as exc:
        raise PointFitFailedError(f"full-sample fit failed: {exc}") from exc
    point = decompose_both(model_h, model_k)

    rows = []
    n_failed = 0
    for b in range(n_replicates):
        rng = generator(seed, STREAM_BOOTSTRAP, b)
        try:
            redrawn_h = fit_ols(_resample(sample_h, rng))
            redrawn_k = fit_ols(_resample(sample_k, rng))
        except ObdflipError:
            n_failed += 1
            continue
        dual = decompose_both(redrawn_h, redrawn_k)
        rows.append(
            (
                dual.by_h.explained,
                dual.by_h.unexplained,
                dual.by_k.explained,
                dual.by_k.unexplained,
                dual.total_gap,
            )
        )
    if n_failed > MAX_FAILED_SHARE * n_replicates:
        raise TooManyFailedReplicatesError(
            f"{n_failed} of {n_replicates} replicates failed to fit "
            f"(tolerated share {MAX_FAILED_SHARE:.0%})"
        )
    kept = np.asarray(rows, dtype=float)

    return BootstrapSummary(
        point=point,
        n_replicates=n_replicates,
        n_failed=n_failed,
        seed=seed,
        by_h=ReferenceStats(
            explained=_component_stats(point.by_h.explained, kept[:, 0]),
            unexplained=_component_stats(point.by_h.unexplained, kept[:, 1]),
        ),
        by_k=ReferenceStats(
            explained=_component_stats(point.by_k.explained, kept[:, 2]),
            unexplained=_component_stats(point.by_k.unexplained, kept[:, 3]),
        ),
        total_gap=_component_stats(point.total_gap, kept[:, 4]),
        replicate_components=kept,
    )


def annotate_significance(summary: BootstrapSummary) -> BootstrapSummary:
    """Recompute the star annotations from the stored p-values (idempotent)."""

    def restar(stats: ComponentStats) -> ComponentStats:
        return replace(stats, stars=significance_stars(stats.p_value))

    return replace(
        summary,
        by_h=ReferenceStats(
            explained=restar(summary.by_h.explained),
            unexplained=restar(summary.by_h.unexplained),
        ),
        by_k=ReferenceStats(
            explained=restar(summary.by_k.explained),
            unexplained=restar(summary.by_k.unexplained),
        ),
        total_gap=restar(summary.total_gap),
    )
