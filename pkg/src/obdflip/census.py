"""Subgroup-search census: decompose and flip-test many table slices.

A census enumerates *analysis cells* (a row subset plus a full role
assignment: outcome column, grouping column with its two values, covariate
columns), runs the dual decomposition on every cell, applies the flip
diagnostics, and optionally attaches bootstrap inference. Two modes:

* ``sweep``: one fixed role assignment crossed with a list of subgroup
  rules (all rows, per-level slices, quantile bins, guideline thresholds,
  random subsamples) — the shape of a clinical subgroup scan;
* ``cross``: the full Cartesian product of subgroup rules x outcomes x
  groupings x covariate sets, with a minimum-magnitude filter on the gap
  and components (enabled by default in this mode) — the shape of a
  many-designs survey.

Cells that cannot be analyzed (too few rows in a group, rank-deficient
fit, below the magnitude filter) become excluded rows with a reason; they
never abort the census.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

import numpy as np
import pandas as pd

from .decomposition import DualDecomposition, decompose_both
from .errors import ObdflipError, UnknownColumnError
from .inference import BootstrapSummary, bootstrap_obd
from .ingest import numeric_column
from .models import GroupSample, fit_ols
from .rng import STREAM_SUBSAMPLE, generator
from .signflip import FlipReport, decision_tree_unexplained

DEFAULT_MIN_GROUP_SIZE = 50
DEFAULT_MIN_MAGNITUDE = 0.01
SWEEP_DEFAULT_REPLICATES = 1000
CROSS_DEFAULT_REPLICATES = 20000

_RULE_KINDS = ("all", "levels", "quantiles", "threshold", "subsamples")
_THRESHOLD_OPS = (">", ">=", "<", "<=")


@dataclass(frozen=True)
class GroupingSpec:
    """A grouping column and the two values that define groups H and K."""

    column: str
    value_h: str
    value_k: str

    def __post_init__(self):
        if self.value_h == self.value_k:
            raise ValueError(f"grouping values must differ, both are {self.value_h!r}")


@dataclass(frozen=True)
class SubgroupRule:
    """A recipe that expands into one or more concrete subgroups."""

    kind: str
    column: str | None = None
    n_bins: int | None = None
    op: str | None = None
    cutoff: float | None = None
    fraction: float | None = None
    count: int | None = None

    def __post_init__(self):
        if self.kind not in _RULE_KINDS:
            raise ValueError(f"unknown subgroup rule kind {self.kind!r}")
        if self.kind in ("levels", "quantiles", "threshold") and not self.column:
            raise ValueError(f"rule kind {self.kind!r} needs a column")
        if self.kind == "quantiles" and (self.n_bins is None or self.n_bins < 2):
            raise ValueError("quantile rules need n_bins >= 2")
        if self.kind == "threshold":
            if self.op not in _THRESHOLD_OPS:
                raise ValueError(f"threshold op must be one of {_THRESHOLD_OPS}")
            if self.cutoff is None:
                raise ValueError("threshold rules need a cutoff")
        if self.kind == "subsamples":
            if self.fraction is None or not 0.0 < self.fraction < 1.0:
                raise ValueError("subsample rules need a fraction strictly inside (0, 1)")
            if self.count is None or self.count < 1:
                raise ValueError("subsample rules need a positive count")


@dataclass(frozen=True)
class SubgroupSpec:
    """One concrete subgroup, expanded from a rule."""

    name: str
    kind: str
    column: str | None = None
    value: str | None = None
    n_bins: int | None = None
    bin_index: int | None = None
    op: str | None = None
    cutoff: float | None = None
    fraction: float | None = None
    draw: int | None = None


@dataclass(frozen=True)
class CensusConfig:
    """Everything a census run needs besides the table itself."""

    mode: str
    subgroup_rules: tuple[SubgroupRule, ...]
    outcomes: tuple[str, ...]
    groupings: tuple[GroupingSpec, ...]
    covariate_sets: tuple[tuple[str, ...], ...]
    seed: int
    min_group_size: int = DEFAULT_MIN_GROUP_SIZE
    min_magnitude: float | None = None
    magnitude_both_references: bool = True
    bootstrap_replicates: int = 0
    bootstrap_flips_only: bool = True

    def __post_init__(self):
        if self.mode not in ("sweep", "cross"):
            raise ValueError(f"mode must be 'sweep' or 'cross', got {self.mode!r}")
        object.__setattr__(self, "subgroup_rules", tuple(self.subgroup_rules))
        object.__setattr__(self, "outcomes", tuple(self.outcomes))
        object.__setattr__(self, "groupings", tuple(self.groupings))
        object.__setattr__(
            self, "covariate_sets", tuple(tuple(s) for s in self.covariate_sets)
        )
        if not self.subgroup_rules:
            raise ValueError("at least one subgroup rule is required")
        if not (self.outcomes and self.groupings and self.covariate_sets):
            raise ValueError("outcomes, groupings and covariate sets must be non-empty")
        if self.mode == "sweep" and (
            len(self.outcomes) != 1
            or len(self.groupings) != 1
            or len(self.covariate_sets) != 1
        ):
            raise ValueError("sweep mode takes exactly one outcome, grouping and covariate set")
        if self.min_group_size < 1:
            raise ValueError("min_group_size must be positive")


def sweep_config(
    subgroup_rules,
    outcome: str,
    grouping: GroupingSpec,
    covariates,
    seed: int,
    min_group_size: int = DEFAULT_MIN_GROUP_SIZE,
    bootstrap_replicates: int = SWEEP_DEFAULT_REPLICATES,
    bootstrap_flips_only: bool = True,
) -> CensusConfig:
    """Fixed-roles census over a list of subgroup rules (no magnitude filter)."""
    return CensusConfig(
        mode="sweep",
        subgroup_rules=tuple(subgroup_rules),
        outcomes=(outcome,),
        groupings=(grouping,),
        covariate_sets=(tuple(covariates),),
        seed=seed,
        min_group_size=min_group_size,
        min_magnitude=None,
        bootstrap_replicates=bootstrap_replicates,
        bootstrap_flips_only=bootstrap_flips_only,
    )


def cross_config(
    subgroup_rules,
    outcomes,
    groupings,
    covariate_sets,
    seed: int,
    min_group_size: int = DEFAULT_MIN_GROUP_SIZE,
    min_magnitude: float | None = DEFAULT_MIN_MAGNITUDE,
    magnitude_both_references: bool = True,
    bootstrap_replicates: int = CROSS_DEFAULT_REPLICATES,
    bootstrap_flips_only: bool = True,
) -> CensusConfig:
    """Cartesian-product census with the magnitude filter on by default."""
    return CensusConfig(
        mode="cross",
        subgroup_rules=tuple(subgroup_rules),
        outcomes=tuple(outcomes),
        groupings=tuple(groupings),
        covariate_sets=tuple(tuple(s) for s in covariate_sets),
        seed=seed,
        min_group_size=min_group_size,
        min_magnitude=min_magnitude,
        magnitude_both_references=magnitude_both_references,
        bootstrap_replicates=bootstrap_replicates,
        bootstrap_flips_only=bootstrap_flips_only,
    )


@dataclass(frozen=True)
class AnalysisCell:
    """A subgroup plus a complete role assignment."""

    subgroup: SubgroupSpec
    outcome: str
    grouping: GroupingSpec
    covariates: tuple[str, ...]

    @property
    def name(self) -> str:
        covs = "+".join(self.covariates)
        return (
            f"{self.subgroup.name} | {self.outcome} ~ {covs} | "
            f"{self.grouping.column}: {self.grouping.value_h} vs {self.grouping.value_k}"
        )


@dataclass(frozen=True)
class CensusRow:
    """Result (or recorded exclusion) for one analysis cell."""

    cell: AnalysisCell
    n_h: int
    n_k: int
    included: bool
    exclusion_reason: str | None
    dual: DualDecomposition | None
    flips: FlipReport | None
    bootstrap: BootstrapSummary | None
    bootstrap_error: str | None


@dataclass(frozen=True)
class CensusReport:
    config: CensusConfig
    rows: tuple[CensusRow, ...]
    n_cells: int
    n_included: int
    n_explained_flips: int
    n_unexplained_flips: int
    n_alignment: int


def _require_columns(frame: pd.DataFrame, columns) -> None:
    missing = [c for c in columns if c not in frame.columns]
    if missing:
        raise UnknownColumnError(f"column(s) {missing} not in table")


def expand_rules(frame: pd.DataFrame, config: CensusConfig) -> tuple[SubgroupSpec, ...]:
    """Concrete subgroups for a table, in deterministic order.

    Level rules expand to the column's distinct non-missing values in sorted
    text order; subsample rules get consecutive global draw indices in rule
    order, which key their random streams.
    """
    specs: list[SubgroupSpec] = []
    draw = 0
    for rule in config.subgroup_rules:
        if rule.kind == "all":
            specs.append(SubgroupSpec(name="all rows", kind="all"))
        elif rule.kind == "levels":
            _require_columns(frame, [rule.column])
            levels = sorted(frame[rule.column].dropna().astype(str).str.strip().unique())
            for value in levels:
                specs.append(
                    SubgroupSpec(
                        name=f"{rule.column}={value}",
                        kind="level",
                        column=rule.column,
                        value=value,
                    )
                )
        elif rule.kind == "quantiles":
            _require_columns(frame, [rule.column])
            for i in range(rule.n_bins):
                specs.append(
                    SubgroupSpec(
                        name=f"{rule.column} bin {i} of {rule.n_bins}",
                        kind="quantile",
                        column=rule.column,
                        n_bins=rule.n_bins,
                        bin_index=i,
                    )
                )
        elif rule.kind == "threshold":
            _require_columns(frame, [rule.column])
            specs.append(
                SubgroupSpec(
                    name=f"{rule.column} {rule.op} {rule.cutoff:g}",
                    kind="threshold",
                    column=rule.column,
                    op=rule.op,
                    cutoff=float(rule.cutoff),
                )
            )
        else:  # subsamples
            for j in range(rule.count):
                specs.append(
                    SubgroupSpec(
                        name=f"random {rule.fraction:g} subsample {j}",
                        kind="subsample",
                        fraction=float(rule.fraction),
                        draw=draw,
                    )
                )
                draw += 1
    return tuple(specs)


def _quantile_assignment(values: np.ndarray, n_bins: int) -> np.ndarray:
    """Bin index per row from full-column empirical quantile edges.

    A value equal to an interior edge goes to the lower bin; rows with
    non-finite values get bin -1 (member of no bin).
    """
    finite = np.isfinite(values)
    edges = np.quantile(values[finite], np.linspace(0.0, 1.0, n_bins + 1))
    idx = np.searchsorted(edges[1:-1], values, side="left")
    idx[~finite] = -1
    return idx


def subgroup_mask(
    frame: pd.DataFrame,
    spec: SubgroupSpec,
    seed: int,
    numeric: dict[str, np.ndarray] | None = None,
    quantile_bins: dict[tuple[str, int], np.ndarray] | None = None,
) -> np.ndarray:
    """Row-membership mask for one subgroup.

    ``numeric`` and ``quantile_bins`` are optional caches used by the census
    loop; without them the needed columns are coerced on the fly.
    """
    n = len(frame)
    if spec.kind == "all":
        return np.ones(n, dtype=bool)
    if spec.kind == "level":
        text = frame[spec.column].astype(str).str.strip()
        return (text == spec.value).to_numpy() & frame[spec.column].notna().to_numpy()
    if spec.kind == "quantile":
        key = (spec.column, spec.n_bins)
        if quantile_bins is not None and key in quantile_bins:
            assignment = quantile_bins[key]
        else:
            values = (
                numeric[spec.column]
                if numeric is not None and spec.column in numeric
                else numeric_column(frame, spec.column)
            )
            assignment = _quantile_assignment(values, spec.n_bins)
        return assignment == spec.bin_index
    if spec.kind == "threshold":
        values = (
            numeric[spec.column]
            if numeric is not None and spec.column in numeric
            else numeric_column(frame, spec.column)
        )
        with np.errstate(invalid="ignore"):
            if spec.op == ">":
                return values > spec.cutoff
            if spec.op == ">=":
                return values >= spec.cutoff
            if spec.op == "<":
                return values < spec.cutoff
            return values <= spec.cutoff
    # subsample: fixed-size draw without replacement, keyed by (seed, draw)
    rng = generator(seed, STREAM_SUBSAMPLE, spec.draw)
    size = math.floor(spec.fraction * n)
    mask = np.zeros(n, dtype=bool)
    mask[rng.permutation(n)[:size]] = True
    return mask


def enumerate_cells(frame: pd.DataFrame, config: CensusConfig) -> tuple[AnalysisCell, ...]:
    """All analysis cells of the census, in deterministic order."""
    subgroups = expand_rules(frame, config)
    return tuple(
        AnalysisCell(subgroup=sg, outcome=o, grouping=g, covariates=tuple(covs))
        for sg, o, g, covs in product(
            subgroups, config.outcomes, config.groupings, config.covariate_sets
        )
    )


def _numeric_cache(frame: pd.DataFrame, config: CensusConfig) -> dict[str, np.ndarray]:
    columns = set(config.outcomes)
    for covs in config.covariate_sets:
        columns.update(covs)
    for rule in config.subgroup_rules:
        if rule.kind in ("quantiles", "threshold"):
            columns.add(rule.column)
    _require_columns(frame, sorted(columns))
    _require_columns(frame, [g.column for g in config.groupings])
    return {c: numeric_column(frame, c) for c in sorted(columns)}


def _magnitude_verdict(dual: DualDecomposition, config: CensusConfig) -> str | None:
    m = config.min_magnitude
    if m is None:
        return None
    if not abs(dual.total_gap) > m:
        return f"|total gap| = {abs(dual.total_gap):.4g} not above {m:g}"
    ok_h = abs(dual.by_h.explained) > m and abs(dual.by_h.unexplained) > m
    ok_k = abs(dual.by_k.explained) > m and abs(dual.by_k.unexplained) > m
    passed = (ok_h and ok_k) if config.magnitude_both_references else (ok_h or ok_k)
    if not passed:
        which = "both references" if config.magnitude_both_references else "either reference"
        return f"components not above {m:g} under {which}"
    return None


def run_flip_census(frame: pd.DataFrame, config: CensusConfig) -> CensusReport:
    """Run the census. Per-cell failures become excluded rows, not errors."""
    numeric = _numeric_cache(frame, config)
    quantile_bins = {
        (rule.column, rule.n_bins): _quantile_assignment(numeric[rule.column], rule.n_bins)
        for rule in config.subgroup_rules
        if rule.kind == "quantiles"
    }
    group_text = {
        g.column: frame[g.column].astype(str).str.strip().to_numpy()
        for g in config.groupings
    }
    group_present = {
        g.column: frame[g.column].notna().to_numpy() for g in config.groupings
    }
    subgroup_cache = {
        spec: subgroup_mask(frame, spec, config.seed, numeric, quantile_bins)
        for spec in expand_rules(frame, config)
    }

    rows: list[CensusRow] = []
    for cell in enumerate_cells(frame, config):
        mask = subgroup_cache[cell.subgroup]
        role_columns = [cell.outcome, *cell.covariates]
        valid = mask.copy()
        for column in role_columns:
            valid &= np.isfinite(numeric[column])
        valid &= group_present[cell.grouping.column]
        text = group_text[cell.grouping.column]
        mask_h = valid & (text == cell.grouping.value_h)
        mask_k = valid & (text == cell.grouping.value_k)
        n_h, n_k = int(mask_h.sum()), int(mask_k.sum())

        def excluded(reason: str) -> CensusRow:
            return CensusRow(
                cell=cell, n_h=n_h, n_k=n_k, included=False, exclusion_reason=reason,
                dual=None, flips=None, bootstrap=None, bootstrap_error=None,
            )

        if min(n_h, n_k) < config.min_group_size:
            rows.append(
                excluded(
                    f"group size below minimum: H={n_h}, K={n_k} "
                    f"(need {config.min_group_size})"
                )
            )
            continue

        covariates = np.column_stack([numeric[c] for c in cell.covariates])
        outcome = numeric[cell.outcome]
        sample_h = GroupSample(
            label=cell.grouping.value_h,
            covariates=covariates[mask_h],
            outcome=outcome[mask_h],
        )
        sample_k = GroupSample(
            label=cell.grouping.value_k,
            covariates=covariates[mask_k],
            outcome=outcome[mask_k],
        )
        try:
            model_h = fit_ols(sample_h)
            model_k = fit_ols(sample_k)
        except ObdflipError as exc:
            rows.append(excluded(f"fit failed: {exc}"))
            continue
        dual = decompose_both(model_h, model_k)

        magnitude_reason = _magnitude_verdict(dual, config)
        if magnitude_reason is not None:
            rows.append(excluded(magnitude_reason))
            continue

        flips = decision_tree_unexplained(model_h, model_k)
        bootstrap = None
        bootstrap_error = None
        wanted = config.bootstrap_replicates > 0 and (
            not config.bootstrap_flips_only
            or flips.explained_flip
            or flips.unexplained_flip
        )
        if wanted:
            try:
                bootstrap = bootstrap_obd(
                    sample_h, sample_k, config.bootstrap_replicates, config.seed
                )
            except ObdflipError as exc:
                bootstrap_error = str(exc)
        rows.append(
            CensusRow(
                cell=cell, n_h=n_h, n_k=n_k, included=True, exclusion_reason=None,
                dual=dual, flips=flips, bootstrap=bootstrap,
                bootstrap_error=bootstrap_error,
            )
        )

    included = [r for r in rows if r.included]
    return CensusReport(
        config=config,
        rows=tuple(rows),
        n_cells=len(rows),
        n_included=len(included),
        n_explained_flips=sum(r.flips.explained_flip for r in included),
        n_unexplained_flips=sum(r.flips.unexplained_flip for r in included),
        n_alignment=sum(r.flips.alignment_holds for r in included),
    )
