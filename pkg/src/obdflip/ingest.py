"""CSV ingestion into a pair of group samples.

The reader is deliberately strict about shape (header row required, role
columns present and distinct) and deliberately forgiving about content:
rows with missing or unparseable values in any role column are dropped and
counted, never imputed. Group membership is matched on the exact text of
the group column, so numeric codes must be quoted as they appear in the
file ("1", not 1.0).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pandas as pd

from .errors import (
    AllRowsDroppedError,
    EmptyDatasetError,
    FewerThanTwoGroupsError,
    MissingColumnError,
)
from .models import GroupSample

DEFAULT_NA_TOKENS = ("", "NA")


@dataclass(frozen=True)
class IngestionSpec:
    """Where the table lives and which columns play which role."""

    path: str
    outcome: str
    group: str
    covariates: tuple[str, ...]
    group_h: str
    group_k: str
    delimiter: str = ","
    na_tokens: tuple[str, ...] = DEFAULT_NA_TOKENS

    def __post_init__(self):
        object.__setattr__(self, "covariates", tuple(self.covariates))
        object.__setattr__(self, "na_tokens", tuple(self.na_tokens))
        if not self.covariates:
            raise ValueError("at least one covariate column is required")
        roles = [self.outcome, self.group, *self.covariates]
        if len(set(roles)) != len(roles):
            raise ValueError(f"role columns must be distinct, got {roles}")
        if self.group_h == self.group_k:
            raise ValueError(f"the two group values must differ, both are {self.group_h!r}")


@dataclass(frozen=True)
class DeletionLog:
    """Row accounting for one ingestion."""

    n_rows_read: int
    n_dropped_missing: int
    n_dropped_non_numeric: int
    n_dropped_other_group: int
    n_kept_h: int
    n_kept_k: int


def load_table(path: str, delimiter: str = ",", na_tokens=DEFAULT_NA_TOKENS) -> pd.DataFrame:
    """Read a delimited text table with a header row.

    Only the given tokens count as missing; pandas' default NA vocabulary is
    disabled so e.g. "None" in a label column survives. All columns arrive
    as strings; numeric coercion happens per role downstream.
    """
    try:
        frame = pd.read_csv(
            path,
            sep=delimiter,
            na_values=list(na_tokens),
            keep_default_na=False,
            dtype=str,
            skipinitialspace=True,
        )
    except FileNotFoundError:
        raise
    except pd.errors.EmptyDataError as exc:
        raise EmptyDatasetError(f"{path}: no data") from exc
    if frame.shape[0] == 0:
        raise EmptyDatasetError(f"{path}: header only, no data rows")
    return frame


def numeric_column(frame: pd.DataFrame, column: str) -> np.ndarray:
    """Column as float array; unparseable or non-finite entries become NaN."""
    if column not in frame.columns:
        raise MissingColumnError(f"column {column!r} not in table")
    values = pd.to_numeric(frame[column], errors="coerce").to_numpy(dtype=float)
    values[~np.isfinite(values)] = np.nan
    return values


def split_groups(
    frame: pd.DataFrame,
    spec: IngestionSpec,
) -> tuple[GroupSample, GroupSample, DeletionLog]:
    """Apply the role mapping to an already-loaded table."""
    for column in (spec.outcome, spec.group, *spec.covariates):
        if column not in frame.columns:
            raise MissingColumnError(
                f"column {column!r} not in table (has: {list(frame.columns)})"
            )
    n_read = len(frame)

    numeric_roles = [spec.outcome, *spec.covariates]
    group_missing = frame[spec.group].isna().to_numpy()
    missing_tokens = frame[numeric_roles].isna().any(axis=1).to_numpy() | group_missing
    numeric = np.column_stack([numeric_column(frame, c) for c in numeric_roles])
    non_numeric = np.isnan(numeric).any(axis=1) & ~missing_tokens
    dropped_values = missing_tokens | non_numeric

    group_text = frame[spec.group].astype(str).str.strip()
    is_h = (group_text == spec.group_h).to_numpy() & ~dropped_values
    is_k = (group_text == spec.group_k).to_numpy() & ~dropped_values
    unmatched_group = ~(is_h | is_k) & ~dropped_values

    log = DeletionLog(
        n_rows_read=n_read,
        n_dropped_missing=int(np.count_nonzero(missing_tokens)),
        n_dropped_non_numeric=int(np.count_nonzero(non_numeric)),
        n_dropped_other_group=int(np.count_nonzero(unmatched_group)),
        n_kept_h=int(np.count_nonzero(is_h)),
        n_kept_k=int(np.count_nonzero(is_k)),
    )

    if log.n_kept_h + log.n_kept_k == 0:
        raise AllRowsDroppedError(
            f"no usable rows remain of {n_read} read "
            f"(missing: {log.n_dropped_missing}, non-numeric: {log.n_dropped_non_numeric}, "
            f"other group values: {log.n_dropped_other_group})"
        )
    if log.n_kept_h == 0 or log.n_kept_k == 0:
        observed = sorted(group_text[~dropped_values].unique().tolist())
        raise FewerThanTwoGroupsError(
            f"group value {spec.group_h!r} matched {log.n_kept_h} rows and "
            f"{spec.group_k!r} matched {log.n_kept_k}; observed values: {observed}"
        )

    outcome = numeric[:, 0]
    covariates = numeric[:, 1:]
    sample_h = GroupSample(
        label=spec.group_h, covariates=covariates[is_h], outcome=outcome[is_h]
    )
    sample_k = GroupSample(
        label=spec.group_k, covariates=covariates[is_k], outcome=outcome[is_k]
    )
    return sample_h, sample_k, log


def ingest(spec: IngestionSpec) -> tuple[GroupSample, GroupSample, DeletionLog]:
    """Load the file named by the spec and split it into the two groups."""
    frame = load_table(spec.path, delimiter=spec.delimiter, na_tokens=spec.na_tokens)
    return split_groups(frame, spec)
