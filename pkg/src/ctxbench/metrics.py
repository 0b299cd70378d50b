"""Evaluation metrics for imbalanced binary scoring plus cross-run aggregates.

Class 1 (default) is the positive class everywhere. The classification
threshold is fixed at 0.5 with a strict ``>``, so a constant-0.5 scorer
predicts all-majority, which is exactly the degenerate regime the recall
and MCC columns are meant to expose.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .errors import UndefinedMetricError

DEFAULT_THRESHOLD = 0.5
WIN_TIE_EPS = 1e-4


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


@dataclass(frozen=True)
class MetricBundle:
    auc: float
    accuracy: float
    default_recall: float
    default_precision: float
    default_f1: float
    balanced_accuracy: float
    mcc: float
    threshold: float = DEFAULT_THRESHOLD

    def as_dict(self) -> dict[str, float]:
        return {
            "auc": self.auc,
            "accuracy": self.accuracy,
            "default_recall": self.default_recall,
            "default_precision": self.default_precision,
            "default_f1": self.default_f1,
            "balanced_accuracy": self.balanced_accuracy,
            "mcc": self.mcc,
            "threshold": self.threshold,
        }


def _validate_scores_labels(scores, labels) -> tuple[np.ndarray, np.ndarray]:
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    if s.shape != y.shape or s.ndim != 1:
        raise ValueError("scores and labels must be 1-D arrays of equal length")
    if not np.all(np.isfinite(s)):
        raise ValueError("scores must be finite")
    if not np.isin(y, (0, 1)).all():
        raise ValueError("labels must be 0/1")
    return s, y


def roc_auc(scores, labels) -> float:
    """Rank-statistic AUC with half credit for ties, O(n log n).

    Equals (#{pos, neg pairs with score_pos > score_neg} + 0.5 * ties)
    / (n_pos * n_neg).
    """
    s, y = _validate_scores_labels(scores, labels)
    n_pos = int(np.sum(y == 1))
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError("AUC undefined: only one class present")
    order = np.argsort(s, kind="mergesort")
    sorted_s = s[order]
    # midranks: average rank over each tie group (1-based)
    ranks = np.empty(len(s), dtype=np.float64)
    i = 0
    while i < len(s):
        j = i
        while j + 1 < len(s) and sorted_s[j + 1] == sorted_s[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    rank_sum_pos = float(np.sum(ranks[y == 1]))
    return (rank_sum_pos - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def confusion(scores, labels, threshold: float = DEFAULT_THRESHOLD) -> ConfusionCounts:
    """Exact counts at the threshold; predict 1 iff score > threshold."""
    s, y = _validate_scores_labels(scores, labels)
    if np.any(s < 0.0) or np.any(s > 1.0):
        raise ValueError("scores must lie in [0, 1]")
    pred = s > threshold
    pos = y == 1
    return ConfusionCounts(
        tp=int(np.sum(pred & pos)),
        fp=int(np.sum(pred & ~pos)),
        fn=int(np.sum(~pred & pos)),
        tn=int(np.sum(~pred & ~pos)),
    )


def mcc(c: ConfusionCounts) -> float:
    """Matthews correlation; zero-denominator cases define MCC = 0.

    Products are taken in Python integers, so large counts cannot overflow.
    """
    tp, fp, fn, tn = int(c.tp), int(c.fp), int(c.fn), int(c.tn)
    if min(tp, fp, fn, tn) < 0:
        raise ValueError("confusion counts must be non-negative")
    den2 = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
    if den2 == 0:
        return 0.0
    return (tp * tn - fp * fn) / math.sqrt(den2)


def bundle(scores, labels, threshold: float = DEFAULT_THRESHOLD) -> MetricBundle:
    """All table columns for one scored test set."""
    auc = roc_auc(scores, labels)
    c = confusion(scores, labels, threshold)
    n = c.total
    precision = c.tp / (c.tp + c.fp) if (c.tp + c.fp) > 0 else 0.0
    recall = c.tp / (c.tp + c.fn) if (c.tp + c.fn) > 0 else 0.0
    f1 = (
        2.0 * precision * recall / (precision + recall)
        if (precision + recall) > 0
        else 0.0
    )
    tpr = recall
    tnr = c.tn / (c.tn + c.fp) if (c.tn + c.fp) > 0 else 0.0
    return MetricBundle(
        auc=auc,
        accuracy=(c.tp + c.tn) / n,
        default_recall=recall,
        default_precision=precision,
        default_f1=f1,
        balanced_accuracy=0.5 * (tpr + tnr),
        mcc=mcc(c),
        threshold=threshold,
    )


# -- cross-experiment aggregation ------------------------------------------------

CellKey = tuple  # (dataset, predictor, context size, repeat)


def _cell_key(rec: Mapping) -> CellKey:
    return (rec["dataset"], rec["predictor"], rec["size"], rec["repeat"])


@dataclass(frozen=True)
class WinRateMatrix:
    """Pairwise head-to-head wins on shared experiment cells.

    ``wins[i, j]`` counts keys where strategy i beat strategy j by more than
    ``eps``; ``ties[i, j]`` counts |diff| <= eps. ``first_place`` is the rate
    at which each strategy is within eps of the best AUC over the keys
    covered by every strategy.
    """

    strategies: tuple[str, ...]
    wins: np.ndarray
    ties: np.ndarray
    shared: np.ndarray
    first_place: dict[str, float]
    skipped_keys: int
    eps: float

    def check_totals(self) -> None:
        for i in range(len(self.strategies)):
            for j in range(len(self.strategies)):
                if i == j:
                    continue
                assert (
                    self.wins[i, j] + self.wins[j, i] + self.ties[i, j]
                    == self.shared[i, j]
                ), (i, j)


def win_rates(records: Iterable[Mapping], eps: float = WIN_TIE_EPS) -> WinRateMatrix:
    """Pairwise strategy comparison over matched (dataset, predictor, size,
    repeat) cells.

    Records missing an AUC, or keys not covered by a strategy pair, are
    skipped and counted, never imputed.
    """
    by_strategy: dict[str, dict[CellKey, float]] = {}
    skipped = 0
    for rec in records:
        auc = rec.get("auc")
        if auc is None:
            skipped += 1
            continue
        by_strategy.setdefault(rec["strategy"], {})[_cell_key(rec)] = float(auc)
    strategies = tuple(sorted(by_strategy))
    k = len(strategies)
    wins = np.zeros((k, k), dtype=np.int64)
    ties = np.zeros((k, k), dtype=np.int64)
    shared = np.zeros((k, k), dtype=np.int64)
    for i in range(k):
        for j in range(i + 1, k):
            common = by_strategy[strategies[i]].keys() & by_strategy[strategies[j]].keys()
            shared[i, j] = shared[j, i] = len(common)
            for key in common:
                d = by_strategy[strategies[i]][key] - by_strategy[strategies[j]][key]
                if d > eps:
                    wins[i, j] += 1
                elif d < -eps:
                    wins[j, i] += 1
                else:
                    ties[i, j] += 1
                    ties[j, i] += 1
    all_keys = (
        set.intersection(*(set(m.keys()) for m in by_strategy.values()))
        if by_strategy
        else set()
    )
    first_place = {s: 0.0 for s in strategies}
    for key in all_keys:
        best = max(by_strategy[s][key] for s in strategies)
        for s in strategies:
            if by_strategy[s][key] >= best - eps:
                first_place[s] += 1.0
    if all_keys:
        for s in strategies:
            first_place[s] /= len(all_keys)
    return WinRateMatrix(
        strategies=strategies,
        wins=wins,
        ties=ties,
        shared=shared,
        first_place=first_place,
        skipped_keys=skipped,
        eps=eps,
    )


def scaling_gain(
    records: Iterable[Mapping],
    strategy: str,
    min_size: int = 1024,
    max_size: int = 50000,
) -> float | None:
    """Mean AUC at the max context size minus mean AUC at the min size.

    Only (dataset, predictor) pairs present at both endpoints contribute;
    returns None when no pair has both.
    """
    lo: dict[tuple, list[float]] = {}
    hi: dict[tuple, list[float]] = {}
    for rec in records:
        if rec["strategy"] != strategy or rec.get("auc") is None:
            continue
        group = (rec["dataset"], rec["predictor"])
        if rec["size"] == min_size:
            lo.setdefault(group, []).append(float(rec["auc"]))
        elif rec["size"] == max_size:
            hi.setdefault(group, []).append(float(rec["auc"]))
    shared = lo.keys() & hi.keys()
    if not shared:
        return None
    lo_vals = [v for g in shared for v in lo[g]]
    hi_vals = [v for g in shared for v in hi[g]]
    return float(np.mean(hi_vals) - np.mean(lo_vals))


def strategy_means(records: Iterable[Mapping]) -> dict[tuple[str, str], float]:
    """Flat mean AUC per (strategy, dataset) over all scored cells."""
    sums: dict[tuple[str, str], list[float]] = {}
    for rec in records:
        if rec.get("auc") is None:
            continue
        sums.setdefault((rec["strategy"], rec["dataset"]), []).append(float(rec["auc"]))
    return {key: float(np.mean(vals)) for key, vals in sums.items()}
