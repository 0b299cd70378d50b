#!/usr/bin/env python3
"""Reproduce the zero-recall trap and its resolution by balanced context.

Builds an imbalanced synthetic dataset, scores a context-kNN predictor
under uniform vs balanced windows at the same budget, and prints the
metric table. Uniform windows inherit the pool's skew and collapse to
majority-only predictions at the 0.5 threshold; balanced windows recover
minority recall without touching the model or the threshold.
"""

import argparse

import numpy as np

from ctxbench.metrics import bundle
from ctxbench.predictors import ContextKnn
from ctxbench.strategies import sample_balanced, sample_uniform
from ctxbench.synth import synth_split


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=20000)
    parser.add_argument("--rate", type=float, default=0.05)
    parser.add_argument("--separation", type=float, default=2.0)
    parser.add_argument("--budget", type=int, default=1024)
    parser.add_argument("--seeds", type=int, default=10)
    args = parser.parse_args()

    rows = {"uniform": [], "balanced": []}
    for seed in range(args.seeds):
        train, test = synth_split(args.n, args.rate, args.separation, seed=seed)
        y = test.labels()
        model = ContextKnn()
        for name, window in (
            ("uniform", sample_uniform(train, args.budget, seed)),
            ("balanced", sample_balanced(train, args.budget, seed)),
        ):
            state = model.condition(window)
            rows[name].append(bundle(model.predict_proba(state, test), y))

    print(
        f"\ncontext-kNN @ m={args.budget}, minority rate {args.rate:.0%}, "
        f"{args.seeds} seeds\n"
    )
    header = f"{'window':<10} {'auc':>7} {'acc':>7} {'recall':>7} {'mcc':>7} {'bal.acc':>8}"
    print(header)
    print("-" * len(header))
    for name, bundles in rows.items():
        mean = lambda attr: np.mean([getattr(b, attr) for b in bundles])
        print(
            f"{name:<10} {mean('auc'):>7.3f} {mean('accuracy'):>7.3f} "
            f"{mean('default_recall'):>7.3f} {mean('mcc'):>7.3f} "
            f"{mean('balanced_accuracy'):>8.3f}"
        )
    print(
        "\nuniform shows the accuracy paradox: high accuracy, near-zero recall."
        "\nbalanced fixes the operating point purely through context composition."
    )


if __name__ == "__main__":
    main()
