"""Multi-stage feature selection over an encoded training pool.

Stages compose: correlation filtering, mutual-information ranking, VIF
multicollinearity pruning, and model-based permutation-importance pruning.
Each stage returns its survivors plus a report entry recording every drop
and the statistic that triggered it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigError
from .tabular import ColumnKind, Table

CORR_THRESHOLD = 0.95
MI_BINS = 10
VIF_CAP = 10.0
PERMUTATION_ROUNDS = 5


@dataclass(frozen=True)
class DroppedFeature:
    name: str
    reason: str
    statistic: float


@dataclass(frozen=True)
class StageReport:
    stage: str
    features_in: tuple[str, ...]
    dropped: tuple[DroppedFeature, ...]
    features_out: tuple[str, ...]


@dataclass(frozen=True)
class SelectionReport:
    stages: tuple[StageReport, ...]

    def surviving(self) -> tuple[str, ...]:
        return self.stages[-1].features_out if self.stages else ()

    def to_dict(self) -> dict:
        return {
            "stages": [
                {
                    "stage": s.stage,
                    "features_in": list(s.features_in),
                    "dropped": [
                        {"name": d.name, "reason": d.reason, "statistic": d.statistic}
                        for d in s.dropped
                    ],
                    "features_out": list(s.features_out),
                }
                for s in self.stages
            ]
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_text(self) -> str:
        lines = []
        for s in self.stages:
            lines.append(
                f"[{s.stage}] {len(s.features_in)} in -> {len(s.features_out)} out"
            )
            for d in s.dropped:
                lines.append(f"  - dropped {d.name}: {d.reason} ({d.statistic:.6g})")
        return "\n".join(lines) + "\n"


def mutual_information(values, labels, n_bins: int = MI_BINS) -> float:
    """MI in bits between an equal-frequency-binned feature and binary labels.

    Uses sum over the joint table of p(x, y) * log2(p(x, y) / (p(x) p(y)))
    with the 0 * log 0 = 0 convention. Constant features score 0.
    """
    x = np.asarray(values, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    if n_bins < 2:
        raise ConfigError("n_bins must be >= 2")
    if not np.isin(y, (0, 1)).all():
        raise ValueError("labels must be 0/1")
    if np.all(x == x[0]):
        return 0.0
    qs = np.quantile(x, [i / n_bins for i in range(1, n_bins)])
    edges = np.unique(qs)
    bins = np.searchsorted(edges, x, side="right")
    n = len(x)
    joint = np.zeros((len(edges) + 1, 2))
    np.add.at(joint, (bins, y), 1.0)
    joint /= n
    px = joint.sum(axis=1, keepdims=True)
    py = joint.sum(axis=0, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = joint * np.log2(joint / (px * py))
    return float(np.nansum(terms))


def _constant_mask(matrix: np.ndarray) -> np.ndarray:
    return np.all(matrix == matrix[0:1, :], axis=0)


def correlation_filter(
    matrix: np.ndarray,
    feature_names: Sequence[str],
    labels,
    threshold: float = CORR_THRESHOLD,
    mi_bins: int = MI_BINS,
) -> tuple[tuple[str, ...], StageReport]:
    """Drop one member of every feature pair with |Pearson rho| > threshold.

    The member with the lower label mutual information goes (ties drop the
    later index). Constant features are dropped outright. The output set is
    guaranteed to contain no violating pair.
    """
    if not 0.0 < threshold <= 1.0:
        raise ConfigError("threshold must be in (0, 1]")
    if matrix.shape[0] < 2:
        raise ConfigError("need at least two rows")
    names = tuple(feature_names)
    dropped: list[DroppedFeature] = []
    alive = np.ones(len(names), dtype=bool)

    const = _constant_mask(matrix)
    for i in np.flatnonzero(const):
        alive[i] = False
        dropped.append(DroppedFeature(names[i], "constant", 0.0))

    idx = np.flatnonzero(alive)
    if len(idx) >= 2:
        corr = np.corrcoef(matrix[:, idx].T)
        mi = np.array(
            [mutual_information(matrix[:, i], labels, mi_bins) for i in idx]
        )
        local_alive = np.ones(len(idx), dtype=bool)
        while True:
            abs_corr = np.abs(corr)
            abs_corr[~local_alive, :] = 0.0
            abs_corr[:, ~local_alive] = 0.0
            np.fill_diagonal(abs_corr, 0.0)
            worst = np.unravel_index(np.argmax(abs_corr), abs_corr.shape)
            rho = abs_corr[worst]
            if rho <= threshold:
                break
            a, b = sorted(worst)
            # keep the more predictive twin; ties drop the later index
            victim = a if mi[a] < mi[b] else b
            local_alive[victim] = False
            alive[idx[victim]] = False
            dropped.append(
                DroppedFeature(names[idx[victim]], "correlated", float(rho))
            )

    out = tuple(n for n, a in zip(names, alive) if a)
    return out, StageReport("correlation_filter", names, tuple(dropped), out)


def mutual_information_ranking(
    matrix: np.ndarray,
    feature_names: Sequence[str],
    labels,
    keep_top_k: int | None = None,
    n_bins: int = MI_BINS,
) -> tuple[tuple[str, ...], StageReport]:
    """Rank features by label MI, optionally keeping only the top k."""
    names = tuple(feature_names)
    mi = np.array([mutual_information(matrix[:, i], labels, n_bins) for i in range(len(names))])
    order = np.lexsort((np.arange(len(names)), -mi))
    if keep_top_k is None or keep_top_k >= len(names):
        kept = set(range(len(names)))
    else:
        kept = set(order[:keep_top_k].tolist())
    dropped = tuple(
        DroppedFeature(names[i], "low_mi", float(mi[i]))
        for i in range(len(names))
        if i not in kept
    )
    out = tuple(n for i, n in enumerate(names) if i in kept)
    return out, StageReport("mutual_information", names, dropped, out)


def _vif_values(matrix: np.ndarray) -> np.ndarray:
    """VIF_j = 1 / (1 - R^2_j) regressing feature j on the other columns.

    Regressions include an intercept. Exact collinearity yields +inf.
    """
    n, f = matrix.shape
    if f == 1:
        return np.ones(1)
    vifs = np.empty(f)
    for j in range(f):
        yj = matrix[:, j]
        Xo = np.delete(matrix, j, axis=1)
        X = np.column_stack([np.ones(n), Xo])
        coef, _, _, _ = np.linalg.lstsq(X, yj, rcond=None)
        resid = yj - X @ coef
        ss_res = float(resid @ resid)
        centered = yj - yj.mean()
        ss_tot = float(centered @ centered)
        if ss_tot <= 0.0:
            vifs[j] = np.inf
            continue
        r2 = 1.0 - ss_res / ss_tot
        vifs[j] = np.inf if r2 >= 1.0 else 1.0 / (1.0 - r2)
    return vifs


def vif_filter(
    matrix: np.ndarray,
    feature_names: Sequence[str],
    cap: float = VIF_CAP,
    max_iterations: int = 100,
) -> tuple[tuple[str, ...], StageReport]:
    """Iteratively drop the highest-VIF feature while any exceeds the cap.

    Constant features are dropped first (their VIF is undefined). Ties on
    the maximum VIF drop the lowest index. Stops at cap satisfaction or the
    iteration limit.
    """
    if cap <= 1.0:
        raise ConfigError("VIF cap must be > 1")
    names = tuple(feature_names)
    alive = np.ones(len(names), dtype=bool)
    dropped: list[DroppedFeature] = []

    for i in np.flatnonzero(_constant_mask(matrix)):
        alive[i] = False
        dropped.append(DroppedFeature(names[i], "constant", 0.0))

    for _ in range(max_iterations):
        idx = np.flatnonzero(alive)
        if len(idx) <= 1:
            break
        vifs = _vif_values(matrix[:, idx])
        worst = int(np.argmax(vifs))  # first occurrence: lowest index among ties
        if vifs[worst] <= cap:
            break
        alive[idx[worst]] = False
        dropped.append(
            DroppedFeature(names[idx[worst]], "high_vif", float(vifs[worst]))
        )
    out = tuple(n for n, a in zip(names, alive) if a)
    return out, StageReport("vif_filter", names, tuple(dropped), out)


def importance_prune(
    matrix: np.ndarray,
    feature_names: Sequence[str],
    labels,
    predictor,
    keep_top_k: int,
    seed: int,
    rounds: int = PERMUTATION_ROUNDS,
) -> tuple[tuple[str, ...], StageReport]:
    """Keep the top-k features by permutation importance on a held-out fold.

    importance(j) = mean AUC drop over ``rounds`` random permutations of
    column j in the held-out half; the predictor is conditioned once on the
    other half. Model-agnostic: any conditioned predictor works.
    """
    from .metrics import roc_auc
    from .predictors import window_from_arrays

    names = tuple(feature_names)
    if keep_top_k < 1:
        raise ConfigError("keep_top_k must be >= 1")
    if keep_top_k >= len(names):
        return names, StageReport("importance_prune", names, (), names)

    y = np.asarray(labels, dtype=np.int64)
    rng = np.random.Generator(np.random.PCG64(seed))
    fit_pos, held_pos = _stratified_halves(y, rng)
    window = window_from_arrays(matrix[fit_pos], y[fit_pos], names)
    state = predictor.condition(window)

    held_X = matrix[held_pos]
    held_y = y[held_pos]
    base = roc_auc(predictor.predict_proba(state, _as_query_table(held_X, names)), held_y)

    importance = np.zeros(len(names))
    for j in range(len(names)):
        drops = []
        for _ in range(rounds):
            perm = rng.permutation(len(held_pos))
            X_perm = held_X.copy()
            X_perm[:, j] = held_X[perm, j]
            scores = predictor.predict_proba(state, _as_query_table(X_perm, names))
            drops.append(base - roc_auc(scores, held_y))
        importance[j] = float(np.mean(drops))

    order = np.lexsort((np.arange(len(names)), -importance))
    kept = set(order[:keep_top_k].tolist())
    dropped = tuple(
        DroppedFeature(names[i], "low_importance", float(importance[i]))
        for i in range(len(names))
        if i not in kept
    )
    out = tuple(n for i, n in enumerate(names) if i in kept)
    return out, StageReport("importance_prune", names, dropped, out)


def _stratified_halves(
    y: np.ndarray, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    fit, held = [], []
    for c in (0, 1):
        members = np.flatnonzero(y == c)
        perm = rng.permutation(len(members))
        half = len(members) // 2
        fit.append(members[perm[:half]])
        held.append(members[perm[half:]])
    return np.sort(np.concatenate(fit)), np.sort(np.concatenate(held))


def _as_query_table(X: np.ndarray, names: Sequence[str]) -> Table:
    return Table.from_columns(
        [(n, ColumnKind.NUMERIC, X[:, i]) for i, n in enumerate(names)]
    )
