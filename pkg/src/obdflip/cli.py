"""Command-line front end.

Subcommands: ``decompose`` (dual decomposition + flip diagnostics from a
CSV or a population-parameter file), ``bootstrap`` (adds resampling
inference), ``flipcheck`` (flip diagnostics with the full branch trace
from a parameter file), ``volume`` (flip-fraction series, analytic or
Monte Carlo), ``search`` (subgroup census over a CSV), and ``simulate``
(write synthetic two-group CSVs).

Output goes to standard output as aligned tables (3-decimal display);
``--out`` additionally writes a machine-readable JSON document with full
precision and a ``schema_version`` field. Exit codes: 0 success, 1 usage
error, 2 data or fit error. Every randomized subcommand requires an
explicit ``--seed``.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np
import pandas as pd

from .census import (
    CROSS_DEFAULT_REPLICATES,
    DEFAULT_MIN_MAGNITUDE,
    SWEEP_DEFAULT_REPLICATES,
    CensusConfig,
    GroupingSpec,
    SubgroupRule,
    run_flip_census,
)
from .decomposition import decompose_both
from .errors import ObdflipError
from .inference import DEFAULT_REPLICATES, bootstrap_obd
from .ingest import DEFAULT_NA_TOKENS, IngestionSpec, ingest, load_table
from .models import GroupModel, fit_ols, out_of_unit_interval_share
from .reports import (
    SCHEMA_VERSION,
    census_payload,
    decomposition_payload,
    format_bootstrap,
    format_census,
    format_dual,
    format_flips,
    format_volume_table,
    to_jsonable,
    volume_payload,
)
from .signflip import decision_tree_unexplained
from .simulation import (
    LinearDGP,
    OvbDGP,
    gen_ovb_group,
    gen_two_groups,
    sbp_bmi_dgps,
)
from .volume import (
    explained_flip_fraction,
    monte_carlo_flip_fraction,
    unexplained_flip_fraction,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


class UsageError(Exception):
    """Bad flags or bad configuration; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on usage errors; route them to our own
    # exception so run_command can map usage -> 1 and keep 2 for data errors
    def error(self, message):
        raise UsageError(message)


def _add_data_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--data", metavar="CSV", help="input table with a header row")
    parser.add_argument("--outcome", help="outcome column name")
    parser.add_argument("--group", help="grouping column name")
    parser.add_argument("--h", dest="value_h", help="group value mapped to H")
    parser.add_argument("--k", dest="value_k", help="group value mapped to K")
    parser.add_argument("--covariates", nargs="+", help="covariate column names")
    parser.add_argument("--delimiter", default=",", help="field delimiter (default comma)")
    parser.add_argument(
        "--na-token",
        action="append",
        dest="na_tokens",
        help="missing-value token; repeatable (default: empty string and NA)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="obdflip",
        description="Two-group decomposition with reference-flip diagnostics.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser(
        "decompose",
        help="dual decomposition plus flip diagnostics, from a CSV or parameter file",
    )
    _add_data_flags(p)
    p.add_argument("--params", metavar="JSON", help="population parameter file")
    p.add_argument("--bootstrap", action="store_true", help="attach bootstrap inference")
    p.add_argument("--B", type=int, default=DEFAULT_REPLICATES, help="bootstrap replicates")
    p.add_argument("--seed", type=int, help="random seed (required with --bootstrap)")
    p.add_argument("--out", metavar="JSON", help="write the machine-readable report here")
    p.set_defaults(handler=cmd_decompose)

    p = sub.add_parser("bootstrap", help="decompose with bootstrap inference (CSV input)")
    _add_data_flags(p)
    p.add_argument("--B", type=int, default=DEFAULT_REPLICATES, help="bootstrap replicates")
    p.add_argument("--seed", type=int, required=True, help="random seed")
    p.add_argument("--out", metavar="JSON")
    p.set_defaults(handler=cmd_bootstrap)

    p = sub.add_parser(
        "flipcheck", help="flip diagnostics with branch trace, from a parameter file"
    )
    p.add_argument("--params", metavar="JSON", required=True)
    p.add_argument("--out", metavar="JSON")
    p.set_defaults(handler=cmd_flipcheck)

    p = sub.add_parser("volume", help="flip-fraction series over covariate counts")
    p.add_argument(
        "--component",
        choices=("explained", "unexplained"),
        default="unexplained",
    )
    p.add_argument(
        "--d",
        nargs="+",
        required=True,
        metavar="D",
        help="covariate counts; integers or inclusive ranges like 1:20",
    )
    p.add_argument("--M", type=float, default=1.0, help="parameter cube half-width")
    p.add_argument(
        "--standardized",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="fix mu_K = 0, mu_H = 1 (standardized units)",
    )
    p.add_argument("--exact", action="store_true", help="analytic fraction")
    p.add_argument("--draws", type=int, help="Monte Carlo draws per d")
    p.add_argument("--seed", type=int, help="random seed (required with --draws)")
    p.add_argument("--out", metavar="JSON")
    p.set_defaults(handler=cmd_volume)

    p = sub.add_parser("search", help="subgroup census over a CSV table")
    p.add_argument("--data", metavar="CSV", required=True)
    p.add_argument("--config", metavar="JSON", required=True, help="census configuration")
    p.add_argument("--seed", type=int, help="overrides the config seed")
    p.add_argument("--delimiter", default=",")
    p.add_argument("--na-token", action="append", dest="na_tokens")
    p.add_argument(
        "--flips-only", action="store_true", help="print only rows with a flip"
    )
    p.add_argument("--out", metavar="JSON")
    p.set_defaults(handler=cmd_search)

    p = sub.add_parser("simulate", help="write a synthetic two-group CSV")
    p.add_argument("--config", metavar="JSON", required=True, help="generator configuration")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--csv", metavar="CSV", required=True, help="output table path")
    p.add_argument("--out", metavar="JSON")
    p.set_defaults(handler=cmd_simulate)

    return parser


def _load_config(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not valid JSON: {exc}") from exc


def _emit(payload: dict, text: str, out: str | None) -> int:
    print(text)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return EXIT_OK


def _params_models(path: str) -> tuple[GroupModel, GroupModel]:
    payload = _load_config(path)
    try:
        def one(entry: dict, default_label: str) -> GroupModel:
            return GroupModel(
                label=str(entry.get("label", default_label)),
                alpha=float(entry["alpha"]),
                beta=np.asarray(entry["beta"], dtype=float),
                mu=np.asarray(entry["mu"], dtype=float),
            )

        return one(payload["H"], "H"), one(payload["K"], "K")
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(
            f"bad parameter file {path}: {exc} "
            "(expected {'H': {alpha, beta, mu}, 'K': {alpha, beta, mu}})"
        ) from exc


def _ingestion_spec(args) -> IngestionSpec:
    missing = [
        flag
        for flag, value in (
            ("--data", args.data),
            ("--outcome", args.outcome),
            ("--group", args.group),
            ("--h", args.value_h),
            ("--k", args.value_k),
            ("--covariates", args.covariates),
        )
        if not value
    ]
    if missing:
        raise UsageError(f"CSV mode needs {', '.join(missing)}")
    return IngestionSpec(
        path=args.data,
        outcome=args.outcome,
        group=args.group,
        covariates=tuple(args.covariates),
        group_h=args.value_h,
        group_k=args.value_k,
        delimiter=args.delimiter,
        na_tokens=tuple(args.na_tokens) if args.na_tokens else DEFAULT_NA_TOKENS,
    )


def _analyze_samples(args, with_bootstrap: bool):
    sample_h, sample_k, log = ingest(_ingestion_spec(args))
    model_h, model_k = fit_ols(sample_h), fit_ols(sample_k)
    dual = decompose_both(model_h, model_k)
    flips = decision_tree_unexplained(model_h, model_k)
    bootstrap = None
    if with_bootstrap:
        if args.seed is None:
            raise UsageError("bootstrap runs need an explicit --seed")
        bootstrap = bootstrap_obd(sample_h, sample_k, args.B, args.seed)

    payload = decomposition_payload(dual, flips, bootstrap)
    payload["ingestion"] = to_jsonable(log)
    shares = {
        model.label: out_of_unit_interval_share(sample, model)
        for sample, model in ((sample_h, model_h), (sample_k, model_k))
    }
    if any(s is not None for s in shares.values()):
        payload["binary_outcome_fit_share_outside_unit_interval"] = shares

    pieces = [format_dual(dual), "", format_flips(flips)]
    for label, share in shares.items():
        if share is not None and share > 0:
            pieces.append(
                f"note: {share:.1%} of group {label} fitted values fall outside "
                "[0, 1] (linear probability fit, predictions not clipped)"
            )
    if bootstrap is not None:
        pieces.extend(["", format_bootstrap(bootstrap)])
    return payload, "\n".join(pieces)


def cmd_decompose(args) -> int:
    if args.params and args.data:
        raise UsageError("give --params or --data, not both")
    if args.params:
        if args.bootstrap:
            raise UsageError("--bootstrap needs row data; population parameters have none")
        model_h, model_k = _params_models(args.params)
        dual = decompose_both(model_h, model_k)
        flips = decision_tree_unexplained(model_h, model_k)
        payload = decomposition_payload(dual, flips)
        text = "\n".join([format_dual(dual), "", format_flips(flips)])
        return _emit(payload, text, args.out)
    if not args.data:
        raise UsageError("need --data (CSV mode) or --params (population mode)")
    payload, text = _analyze_samples(args, with_bootstrap=args.bootstrap)
    return _emit(payload, text, args.out)


def cmd_bootstrap(args) -> int:
    payload, text = _analyze_samples(args, with_bootstrap=True)
    return _emit(payload, text, args.out)


def cmd_flipcheck(args) -> int:
    model_h, model_k = _params_models(args.params)
    flips = decision_tree_unexplained(model_h, model_k)
    payload = {
        "schema_version": SCHEMA_VERSION,
        "kind": "flip",
        "flips": to_jsonable(flips),
    }
    return _emit(payload, format_flips(flips), args.out)


def _parse_d_values(tokens) -> list[int]:
    values: list[int] = []
    try:
        for token in tokens:
            if ":" in token:
                lo_text, hi_text = token.split(":", 1)
                lo, hi = int(lo_text), int(hi_text)
                if hi < lo:
                    raise UsageError(f"empty d-range {token!r}")
                values.extend(range(lo, hi + 1))
            else:
                values.append(int(token))
    except ValueError as exc:
        raise UsageError(f"bad --d value: {exc}") from exc
    return values


def cmd_volume(args) -> int:
    ds = _parse_d_values(args.d)
    if not args.exact and args.draws is None:
        raise UsageError("need --exact, --draws, or both")
    if args.draws is not None and args.seed is None:
        raise UsageError("Monte Carlo runs need an explicit --seed")
    if args.exact and not args.standardized:
        raise UsageError("analytic fractions are available in standardized units only")

    estimates = []
    for d in ds:
        if args.exact:
            if args.component == "explained":
                estimates.append(explained_flip_fraction(d))
            else:
                estimates.append(unexplained_flip_fraction(d))
        if args.draws is not None:
            estimates.append(
                monte_carlo_flip_fraction(
                    args.component,
                    d,
                    args.draws,
                    args.seed,
                    half_width=args.M,
                    standardized=args.standardized,
                )
            )
    return _emit(volume_payload(estimates), format_volume_table(estimates), args.out)


def _subgroup_rule(entry: dict) -> SubgroupRule:
    return SubgroupRule(
        kind=entry.get("kind", ""),
        column=entry.get("column"),
        n_bins=entry.get("n_bins"),
        op=entry.get("op"),
        cutoff=None if entry.get("cutoff") is None else float(entry["cutoff"]),
        fraction=None if entry.get("fraction") is None else float(entry["fraction"]),
        count=entry.get("count"),
    )


def _census_config(payload: dict, seed_override: int | None, path: str) -> CensusConfig:
    try:
        mode = payload["mode"]
        seed = seed_override if seed_override is not None else payload.get("seed")
        if seed is None:
            raise UsageError("census needs a seed: config 'seed' field or --seed")
        kwargs = {}
        for key in (
            "min_group_size",
            "min_magnitude",
            "magnitude_both_references",
            "bootstrap_replicates",
            "bootstrap_flips_only",
        ):
            if key in payload:
                kwargs[key] = payload[key]
        if "bootstrap_replicates" not in kwargs:
            kwargs["bootstrap_replicates"] = (
                SWEEP_DEFAULT_REPLICATES if mode == "sweep" else CROSS_DEFAULT_REPLICATES
            )
        if "min_magnitude" not in kwargs and mode == "cross":
            kwargs["min_magnitude"] = DEFAULT_MIN_MAGNITUDE
        return CensusConfig(
            mode=mode,
            subgroup_rules=tuple(_subgroup_rule(r) for r in payload["subgroups"]),
            outcomes=tuple(payload["outcomes"]),
            groupings=tuple(
                GroupingSpec(column=g["column"], value_h=str(g["h"]), value_k=str(g["k"]))
                for g in payload["groupings"]
            ),
            covariate_sets=tuple(tuple(s) for s in payload["covariate_sets"]),
            seed=int(seed),
            **kwargs,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"bad census config {path}: {exc}") from exc


def cmd_search(args) -> int:
    config = _census_config(_load_config(args.config), args.seed, args.config)
    frame = load_table(
        args.data,
        delimiter=args.delimiter,
        na_tokens=tuple(args.na_tokens) if args.na_tokens else DEFAULT_NA_TOKENS,
    )
    report = run_flip_census(frame, config)
    return _emit(
        census_payload(report),
        format_census(report, flips_only=args.flips_only),
        args.out,
    )


def _linear_dgp(entry: dict) -> LinearDGP:
    return LinearDGP(
        mu_x=entry["mu_x"],
        sigma_x=entry["sigma_x"],
        alpha=float(entry["alpha"]),
        beta=entry["beta"],
        noise_sd=float(entry["noise_sd"]),
    )


def _ovb_dgp(entry: dict) -> OvbDGP:
    return OvbDGP(
        omega=float(entry["omega"]),
        theta=entry["theta"],
        gamma=entry["gamma"],
        zeta=entry["zeta"],
        psi=entry["psi"],
        mu_x=entry["mu_x"],
        sigma_x=entry["sigma_x"],
        z_noise_sd=float(entry["z_noise_sd"]),
        y_noise_sd=float(entry["y_noise_sd"]),
    )


def _samples_frame(sample_h, sample_k) -> pd.DataFrame:
    d = sample_h.n_covariates
    columns = ["group", "y", *(f"x{i + 1}" for i in range(d))]

    def block(sample):
        data = {"group": [sample.label] * sample.n_rows, "y": sample.outcome}
        for i in range(d):
            data[f"x{i + 1}"] = sample.covariates[:, i]
        return pd.DataFrame(data, columns=columns)

    return pd.concat([block(sample_h), block(sample_k)], ignore_index=True)


def cmd_simulate(args) -> int:
    payload = _load_config(args.config)
    try:
        kind = payload["kind"]
        n_h, n_k = int(payload["n_h"]), int(payload["n_k"])
        labels = tuple(str(v) for v in payload.get("labels", ("H", "K")))
        if len(labels) != 2 or labels[0] == labels[1]:
            raise ValueError("labels must be two distinct values")
        if kind == "sbp_bmi":
            dgp_h, dgp_k = sbp_bmi_dgps()
            sample_h, sample_k = gen_two_groups(dgp_h, dgp_k, n_h, n_k, args.seed, labels)
        elif kind == "linear":
            dgp_h, dgp_k = _linear_dgp(payload["h"]), _linear_dgp(payload["k"])
            sample_h, sample_k = gen_two_groups(dgp_h, dgp_k, n_h, n_k, args.seed, labels)
        elif kind == "omitted_variable":
            dgp_h, dgp_k = _ovb_dgp(payload["h"]), _ovb_dgp(payload["k"])
            sample_h = gen_ovb_group(dgp_h, n_h, args.seed, label=labels[0], stream=0)
            sample_k = gen_ovb_group(dgp_k, n_k, args.seed, label=labels[1], stream=1)
        else:
            raise ValueError(
                f"unknown generator kind {kind!r} "
                "(expected sbp_bmi, linear, or omitted_variable)"
            )
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"bad generator config {args.config}: {exc}") from exc

    frame = _samples_frame(sample_h, sample_k)
    frame.to_csv(args.csv, index=False)
    report = {
        "schema_version": SCHEMA_VERSION,
        "kind": "simulation",
        "generator": kind,
        "csv": args.csv,
        "seed": args.seed,
        "n_h": sample_h.n_rows,
        "n_k": sample_k.n_rows,
        "group_values": list(labels),
        "columns": list(frame.columns),
    }
    text = (
        f"wrote {len(frame)} rows ({labels[0]}: {sample_h.n_rows}, "
        f"{labels[1]}: {sample_k.n_rows}) to {args.csv}"
    )
    return _emit(report, text, args.out)


def run_command(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # argparse --help
        return int(exc.code or 0)
    try:
        return args.handler(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(
            f"run 'obdflip {args.command} --help' for flag documentation",
            file=sys.stderr,
        )
        return EXIT_USAGE
    except (ObdflipError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))
