#!/usr/bin/env python3
"""End-to-end benchmark grid on synthetic data: all seven strategies,
two native predictors, several context sizes; emits every report kind."""

import argparse
from pathlib import Path

from ctxbench.harness import ExperimentPlan, PredictorSpec, StrategySpec, records_for_metrics, run
from ctxbench.reports import REPORT_KINDS, emit_report
from ctxbench.synth import synth_split


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=12000)
    parser.add_argument("--rate", type=float, default=0.08)
    parser.add_argument("--separation", type=float, default=2.0)
    parser.add_argument("--sizes", type=int, nargs="+", default=[256, 1024, 2048])
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--workers", type=int, default=4)
    parser.add_argument("--out-dir", type=Path, default=Path("bench_out"))
    args = parser.parse_args()

    train, test = synth_split(args.n, args.rate, args.separation, seed=args.seed)
    km = {"km_iterations": 20, "km_batch": 1024}
    plan = ExperimentPlan(
        dataset=f"synth-n{args.n}-r{args.rate}",
        train=train,
        test=test,
        predictors=(
            PredictorSpec(kind="knn", name="context-knn"),
            PredictorSpec(kind="gaussian_nb", name="context-gnb"),
        ),
        strategies=(
            StrategySpec("uniform"),
            StrategySpec("stratified"),
            StrategySpec("balanced"),
            StrategySpec("oversample_plus", {"boost": 2.0, "min_minority": 8}),
            StrategySpec("smote", {"smote_k": 5}),
            StrategySpec("diversity_km", km),
            StrategySpec("hybrid", {"rho": 0.5, **km}),
        ),
        sizes=tuple(args.sizes),
        repeats=args.repeats,
        master_seed=args.seed,
    )

    args.out_dir.mkdir(parents=True, exist_ok=True)
    store = args.out_dir / "store.jsonl"
    print(f"running {len(plan.cells())} cells with {args.workers} workers ...")
    records = run(plan, store, workers=args.workers, resume=store.exists())
    failed = [r for r in records if r["status"] != "ok"]
    print(f"done: {len(records)} cells, {len(failed)} failed")

    flat = records_for_metrics(records)
    for kind in REPORT_KINDS:
        _, txt = emit_report(kind, flat, args.out_dir)
        print(f"\n== {kind} ==")
        print(txt.read_text())


if __name__ == "__main__":
    main()
