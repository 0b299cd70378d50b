"""Command-line entry points: ingest, select-features, sample-context,
bench run/report, synth."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import config as cfgmod
from .encoding import fit_encoder
from .errors import CtxbenchError
from .harness import load_store, run
from .ingest import attach_label, engineer, impute, load_csv, split
from .reports import REPORT_KINDS, emit_report
from .selection import (
    SelectionReport,
    correlation_filter,
    importance_prune,
    mutual_information_ranking,
    vif_filter,
)
from .strategies import ContextSpec, build_context
from .synth import synth_dataset
from .table_io import load_table, save_table


def _cmd_synth(args) -> int:
    table = synth_dataset(
        n=args.n,
        minority_rate=args.rate,
        separation=args.separation,
        noise_dims=args.noise_dims,
        seed=args.seed,
    )
    save_table(table, Path(args.out))
    print(f"wrote {table.n_rows} rows to {args.out}")
    return 0


def _cmd_ingest(args) -> int:
    cfg = cfgmod.load_config(Path(args.config)) if args.config else {}
    ingest_cfg = cfg.get("ingest", {})
    table = load_csv(
        args.csv,
        schema_hints=cfgmod.parse_schema_hints(cfg),
        date_format=ingest_cfg.get("date_format", "%Y-%m-%d"),
        delimiter=ingest_cfg.get("delimiter", ","),
        missing_tokens=tuple(ingest_cfg.get("missing_tokens", ("", "NA"))),
    )
    rules = cfgmod.parse_impute_rules(cfg)
    if rules:
        table = impute(table, rules)
    recipes = cfgmod.parse_recipes(cfg)
    if recipes:
        table = engineer(table, recipes)
    label = args.label or ingest_cfg.get("label")
    if label:
        table = attach_label(table, label)
    out = Path(args.out)
    spec = cfgmod.parse_split(cfg)
    if args.split and spec is not None:
        train, test = split(table, spec)
        save_table(train, out.with_suffix(".train.csv"))
        save_table(test, out.with_suffix(".test.csv"))
        print(
            f"ingested {table.n_rows} rows -> "
            f"train {train.n_rows} / test {test.n_rows}"
        )
    else:
        save_table(table, out)
        print(f"ingested {table.n_rows} rows -> {out}")
    return 0


def _cmd_select_features(args) -> int:
    cfg = cfgmod.load_config(Path(args.config)) if args.config else {}
    sel = cfgmod.parse_selection(cfg)
    table = load_table(Path(args.table))
    encoder = fit_encoder(table)
    encoded = encoder.transform(table)
    names = encoded.feature_names
    matrix = encoded.matrix
    labels = table.labels()

    stages = []
    surviving, stage = correlation_filter(
        matrix, names, labels, threshold=sel["correlation_threshold"], mi_bins=sel["mi_bins"]
    )
    stages.append(stage)
    keep_idx = [names.index(n) for n in surviving]
    matrix, names = matrix[:, keep_idx], surviving

    surviving, stage = mutual_information_ranking(
        matrix, names, labels, keep_top_k=sel["mi_keep"], n_bins=sel["mi_bins"]
    )
    stages.append(stage)
    keep_idx = [names.index(n) for n in surviving]
    matrix, names = matrix[:, keep_idx], surviving

    surviving, stage = vif_filter(matrix, names, cap=sel["vif_cap"])
    stages.append(stage)
    keep_idx = [names.index(n) for n in surviving]
    matrix, names = matrix[:, keep_idx], surviving

    if sel["importance_keep"]:
        from .predictors import ContextKnn

        surviving, stage = importance_prune(
            matrix,
            names,
            labels,
            ContextKnn(),
            keep_top_k=sel["importance_keep"],
            seed=sel["seed"],
            rounds=sel["importance_rounds"],
        )
        stages.append(stage)
        names = surviving

    report = SelectionReport(stages=tuple(stages))
    # keep source columns that still back at least one surviving feature
    surviving_sources = {
        enc.source
        for enc in encoded.encoding_map
        for feat in report.surviving()
        if feat == enc.source or feat.startswith(f"{enc.source}=") or feat == f"{enc.source}#freq"
    }
    drop = [
        n for n in table.names if n != table.label and n not in surviving_sources
    ]
    reduced = table.drop_columns(drop) if drop else table
    save_table(reduced, Path(args.out))
    report_path = Path(args.report)
    report_path.write_text(report.to_text(), encoding="utf-8")
    report_path.with_suffix(".json").write_text(report.to_json(), encoding="utf-8")
    print(
        f"selection: {len(encoded.feature_names)} features -> {len(report.surviving())}"
        f"; table columns {len(table.names)} -> {len(reduced.names)}"
    )
    return 0


def _cmd_sample_context(args) -> int:
    table = load_table(Path(args.table))
    spec = ContextSpec(
        strategy=args.strategy,
        budget=args.budget,
        seed=args.seed,
        rho=args.rho,
        boost=args.boost,
        min_minority=args.min_minority,
        smote_k=args.k,
    )
    window = build_context(table, spec)
    out = Path(args.out)
    save_table(window.rows, out)
    sidecar = {
        "strategy": spec.strategy,
        "budget": spec.budget,
        "seed": spec.seed,
        "params": spec.params_dict(),
        "achieved": {
            "majority": window.n_majority,
            "minority": window.n_minority,
            "synthetic": window.n_synthetic,
        },
        "warnings": list(window.warnings),
    }
    out.with_suffix(out.suffix + ".provenance.json").write_text(
        json.dumps(sidecar, indent=2), encoding="utf-8"
    )
    print(
        f"{spec.strategy}: {window.size} rows "
        f"({window.n_minority} minority, {window.n_synthetic} synthetic) -> {out}"
    )
    return 0


def _cmd_bench_run(args) -> int:
    cfg = cfgmod.load_config(Path(args.plan))
    plan_cfg = cfg.get("plan", {})
    train = load_table(Path(plan_cfg["train"]))
    test = load_table(Path(plan_cfg["test"]))
    plan = cfgmod.parse_plan(cfg, train, test)
    if args.seed is not None:
        from dataclasses import replace

        plan = replace(plan, master_seed=args.seed)
    records = run(
        plan,
        Path(args.store),
        workers=args.workers,
        resume=args.resume,
    )
    failed = [r for r in records if r["status"] != "ok"]
    print(f"{len(records)} cells, {len(failed)} failed, store: {args.store}")
    for r in failed:
        print(f"  failed {r['cell_id']}: {r['error']}")
    if failed and not args.allow_failures:
        return 1
    return 0


def _cmd_bench_report(args) -> int:
    from .harness import records_for_metrics

    records = records_for_metrics(load_store(Path(args.store)))
    kwargs = {}
    if args.kind == "win-rates" and args.eps is not None:
        kwargs["eps"] = args.eps
    if args.kind == "scaling":
        if args.min_size is not None:
            kwargs["min_size"] = args.min_size
        if args.max_size is not None:
            kwargs["max_size"] = args.max_size
    csv_path, txt_path = emit_report(args.kind, records, Path(args.out_dir), **kwargs)
    print(txt_path.read_text(encoding="utf-8"))
    print(f"wrote {csv_path} and {txt_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ctxbench",
        description="Context-window construction and benchmarking for tabular ICL",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic imbalanced dataset")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--rate", type=float, required=True)
    p.add_argument("--separation", type=float, required=True)
    p.add_argument("--noise-dims", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_synth)

    p = sub.add_parser("ingest", help="load, impute, and engineer a CSV")
    p.add_argument("--csv", required=True)
    p.add_argument("--config")
    p.add_argument("--label")
    p.add_argument("--split", action="store_true", help="also apply the configured split")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_ingest)

    p = sub.add_parser("select-features", help="run the selection pipeline")
    p.add_argument("--table", required=True)
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    p.add_argument("--report", required=True)
    p.set_defaults(fn=_cmd_select_features)

    p = sub.add_parser("sample-context", help="build one context window")
    p.add_argument("--table", required=True)
    p.add_argument("--strategy", required=True)
    p.add_argument("--budget", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--rho", type=float, default=0.5)
    p.add_argument("--boost", type=float, default=2.0)
    p.add_argument("--min-minority", type=int, default=0)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_sample_context)

    bench = sub.add_parser("bench", help="experiment grid")
    bench_sub = bench.add_subparsers(dest="bench_command", required=True)

    p = bench_sub.add_parser("run", help="run a plan")
    p.add_argument("plan", help="plan TOML file")
    p.add_argument("--store", required=True)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--resume", action="store_true")
    p.add_argument("--allow-failures", action="store_true")
    p.add_argument("--seed", type=int, default=None, help="override master seed")
    p.set_defaults(fn=_cmd_bench_run)

    p = bench_sub.add_parser("report", help="aggregate a results store")
    p.add_argument("store")
    p.add_argument("--kind", choices=REPORT_KINDS, required=True)
    p.add_argument("--out-dir", default="reports")
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--min-size", type=int, default=None)
    p.add_argument("--max-size", type=int, default=None)
    p.set_defaults(fn=_cmd_bench_report)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except CtxbenchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
