"""Report shaping: JSON payloads (full precision) and console tables.

JSON payloads carry every stored digit and a ``schema_version`` so that
downstream tooling can detect format changes. Console tables round to
three decimals for reading; they are presentation only.
"""

from __future__ import annotations

import dataclasses
from typing import Any

import numpy as np

from .census import CensusReport, CensusRow
from .decomposition import DualDecomposition
from .inference import BootstrapSummary
from .signflip import FlipReport
from .volume import VolumeEstimate

SCHEMA_VERSION = "1"

# bulky per-replicate arrays stay out of serialized reports
_SKIPPED_FIELDS = frozenset({"replicate_components"})


def to_jsonable(obj: Any) -> Any:
    """Recursively convert dataclasses and numpy values to plain Python."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {
            f.name: to_jsonable(getattr(obj, f.name))
            for f in dataclasses.fields(obj)
            if f.name not in _SKIPPED_FIELDS
        }
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, float) and not np.isfinite(obj):
        return None
    return obj


def decomposition_payload(
    dual: DualDecomposition,
    flips: FlipReport | None = None,
    bootstrap: BootstrapSummary | None = None,
) -> dict:
    payload = {
        "schema_version": SCHEMA_VERSION,
        "kind": "decomposition",
        "total_gap": dual.total_gap,
        "by_h": to_jsonable(dual.by_h),
        "by_k": to_jsonable(dual.by_k),
    }
    if flips is not None:
        payload["flips"] = to_jsonable(flips)
    if bootstrap is not None:
        payload["bootstrap"] = to_jsonable(bootstrap)
    return payload


def volume_payload(estimates) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "volume",
        "estimates": [to_jsonable(e) for e in estimates],
    }


def census_payload(report: CensusReport) -> dict:
    rows = []
    for row in report.rows:
        entry = to_jsonable(row)
        entry["cell_name"] = row.cell.name
        rows.append(entry)
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "census",
        "config": to_jsonable(report.config),
        "n_cells": report.n_cells,
        "n_included": report.n_included,
        "n_explained_flips": report.n_explained_flips,
        "n_unexplained_flips": report.n_unexplained_flips,
        "n_alignment": report.n_alignment,
        "rows": rows,
    }


def _fmt(x: float | None) -> str:
    if x is None:
        return "n/a"
    return f"{x:.3f}"


def _table(headers: list[str], body: list[list[str]]) -> str:
    widths = [
        max(len(h), *(len(r[i]) for r in body)) if body else len(h)
        for i, h in enumerate(headers)
    ]
    def line(cells):
        return "  ".join(c.rjust(w) for c, w in zip(cells, widths))
    out = [line(headers), line(["-" * w for w in widths])]
    out.extend(line(r) for r in body)
    return "\n".join(out)


def format_dual(dual: DualDecomposition) -> str:
    h, k = dual.by_h, dual.by_k
    body = [
        [h.reference, _fmt(h.explained), _fmt(h.unexplained), _fmt(h.counterfactual_mean)],
        [k.reference, _fmt(k.explained), _fmt(k.unexplained), _fmt(k.counterfactual_mean)],
    ]
    table = _table(
        ["reference", "explained", "unexplained", "counterfactual mean"], body
    )
    return f"total gap ({h.reference} minus {k.reference}): {_fmt(dual.total_gap)}\n{table}"


def format_flips(flips: FlipReport) -> str:
    q = flips.quantities
    lines = [
        "flip diagnostics:",
        f"  explained sign flip:   {_verdict(flips.explained_flip, flips.explained_boundary)}"
        f"  (E_H={_fmt(q.explained_h)}, E_K={_fmt(q.explained_k)})",
        f"  unexplained sign flip: {_verdict(flips.unexplained_flip, flips.unexplained_boundary)}"
        f"  (U_H={_fmt(q.unexplained_h)}, U_K={_fmt(q.unexplained_k)})",
        f"  alignment condition:   {'holds (flip impossible)' if flips.alignment_holds else 'does not hold'}",
        "  decision path:",
    ]
    lines.extend(f"    {s.description}: {s.outcome}" for s in flips.branch_trace)
    return "\n".join(lines)


def _verdict(flip: bool, boundary: bool) -> str:
    if boundary:
        return "boundary (within sign tolerance)"
    return "YES" if flip else "no"


def format_bootstrap(summary: BootstrapSummary) -> str:
    def cell(stats):
        se = f"({stats.standard_error:.3f})" if stats.standard_error is not None else ""
        return f"{_fmt(stats.estimate)} {se}{stats.stars}"

    body = [
        [name, cell(ref.explained), cell(ref.unexplained), cell(summary.total_gap)]
        for name, ref in (
            (summary.point.by_h.reference, summary.by_h),
            (summary.point.by_k.reference, summary.by_k),
        )
    ]
    table = _table(["reference", "explained", "unexplained", "total gap"], body)
    return (
        f"bootstrap: {summary.n_replicates} replicates, "
        f"{summary.n_failed} failed, seed {summary.seed}\n{table}"
    )


def format_volume_table(estimates) -> str:
    body = [
        [
            e.component,
            str(e.d),
            e.method,
            f"{e.fraction:.6f}",
            f"{e.standard_error:.6f}" if e.standard_error is not None else "",
            str(e.n_draws or ""),
        ]
        for e in estimates
    ]
    return _table(["component", "d", "method", "fraction", "se", "draws"], body)


def _census_row_line(row: CensusRow) -> str:
    if not row.included:
        return f"  [excluded] {row.cell.name}: {row.exclusion_reason}"
    marks = []
    if row.flips.unexplained_flip:
        marks.append("UNEXPLAINED FLIP")
    if row.flips.explained_flip:
        marks.append("EXPLAINED FLIP")
    if row.flips.unexplained_boundary or row.flips.explained_boundary:
        marks.append("boundary")
    mark = ", ".join(marks) if marks else "no flip"
    d = row.dual
    stars = ""
    if row.bootstrap is not None:
        su = row.bootstrap
        stars = (
            f"  [U_H p={su.by_h.unexplained.p_value:.3f}{su.by_h.unexplained.stars}"
            f", U_K p={su.by_k.unexplained.p_value:.3f}{su.by_k.unexplained.stars}]"
        )
    elif row.bootstrap_error:
        stars = f"  [bootstrap failed: {row.bootstrap_error}]"
    return (
        f"  [{mark}] {row.cell.name} (nH={row.n_h}, nK={row.n_k}): "
        f"U_H={_fmt(d.by_h.unexplained)}, U_K={_fmt(d.by_k.unexplained)}, "
        f"E_H={_fmt(d.by_h.explained)}, E_K={_fmt(d.by_k.explained)}{stars}"
    )


def format_census(report: CensusReport, flips_only: bool = False) -> str:
    lines = [
        f"census ({report.config.mode} mode): {report.n_cells} cells, "
        f"{report.n_included} analyzed, "
        f"{report.n_unexplained_flips} unexplained flips, "
        f"{report.n_explained_flips} explained flips, "
        f"{report.n_alignment} alignment-guaranteed",
    ]
    for row in report.rows:
        if flips_only:
            interesting = row.included and (
                row.flips.unexplained_flip or row.flips.explained_flip
            )
            if not interesting:
                continue
        lines.append(_census_row_line(row))
    return "\n".join(lines)
