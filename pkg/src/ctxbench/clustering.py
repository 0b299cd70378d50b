"""Seeded mini-batch k-means with D^2 (k-means++ style) initialization.

Built for representative selection: the caller typically sets k equal to
the selection budget and wants, for every non-empty cluster, the member row
nearest the centroid. Updates use the per-center running-mean form, so one
batch step is order-independent and the whole procedure is a pure function
of (data, params, seed).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

CHUNK = 2048


def _pairwise_sq_dists(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Squared Euclidean distances, (len(A), len(B)); clipped at 0."""
    aa = np.sum(A * A, axis=1)[:, None]
    bb = np.sum(B * B, axis=1)[None, :]
    d = aa + bb - 2.0 * (A @ B.T)
    np.maximum(d, 0.0, out=d)
    return d


def assign_nearest(X: np.ndarray, centers: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Index of the nearest center per row plus that squared distance, chunked."""
    n = X.shape[0]
    labels = np.empty(n, dtype=np.int64)
    dists = np.empty(n)
    for start in range(0, n, CHUNK):
        block = _pairwise_sq_dists(X[start : start + CHUNK], centers)
        labels[start : start + CHUNK] = np.argmin(block, axis=1)
        dists[start : start + CHUNK] = block[
            np.arange(block.shape[0]), labels[start : start + CHUNK]
        ]
    return labels, dists


def dsquared_init(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ initialization: D^2-weighted sampling of k distinct rows.

    When all remaining mass is zero (duplicate-heavy data), falls back to a
    uniform draw over rows not yet chosen, so k distinct row indices always
    come back.
    """
    n = X.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= {n}, got {k}")
    chosen = np.empty(k, dtype=np.int64)
    taken = np.zeros(n, dtype=bool)
    chosen[0] = rng.integers(n)
    taken[chosen[0]] = True
    d2 = _pairwise_sq_dists(X, X[chosen[0]][None, :])[:, 0]
    for i in range(1, k):
        d2[taken] = 0.0
        total = d2.sum()
        if total > 0.0:
            probs = d2 / total
            pick = int(rng.choice(n, p=probs))
        else:
            pick = int(rng.choice(np.flatnonzero(~taken)))
        chosen[i] = pick
        taken[pick] = True
        d2 = np.minimum(d2, _pairwise_sq_dists(X, X[pick][None, :])[:, 0])
    return chosen


@dataclass(frozen=True)
class KMeansResult:
    centers: np.ndarray
    labels: np.ndarray  # final full assignment
    counts: np.ndarray  # members per cluster under the final assignment


def minibatch_kmeans(
    X: np.ndarray,
    k: int,
    rng: np.random.Generator,
    iterations: int = 100,
    batch_size: int = 1024,
) -> KMeansResult:
    """Mini-batch k-means over a fixed iteration budget.

    Each iteration draws a batch without replacement, assigns it to the
    current centers, and moves every touched center to the running mean of
    everything it has absorbed (count-weighted). Ends with one full
    assignment pass.
    """
    n = X.shape[0]
    centers = X[dsquared_init(X, k, rng)].astype(np.float64, copy=True)
    weights = np.ones(k)  # each center starts as the mean of its seed row
    b = min(batch_size, n)
    for _ in range(iterations):
        batch_idx = rng.choice(n, size=b, replace=False)
        batch = X[batch_idx]
        labels, _ = assign_nearest(batch, centers)
        sums = np.zeros_like(centers)
        np.add.at(sums, labels, batch)
        counts = np.bincount(labels, minlength=k).astype(np.float64)
        touched = counts > 0
        new_w = weights[touched] + counts[touched]
        centers[touched] = (
            centers[touched] * weights[touched, None] + sums[touched]
        ) / new_w[:, None]
        weights[touched] = new_w
    labels, _ = assign_nearest(X, centers)
    return KMeansResult(
        centers=centers,
        labels=labels,
        counts=np.bincount(labels, minlength=k),
    )


def nearest_member_per_cluster(X: np.ndarray, result: KMeansResult) -> np.ndarray:
    """Row index nearest its centroid for each non-empty cluster.

    Ties resolve to the lowest row index. Returns indices ordered by
    cluster id.
    """
    reps = []
    for c in np.flatnonzero(result.counts > 0):
        members = np.flatnonzero(result.labels == c)
        d = _pairwise_sq_dists(X[members], result.centers[c][None, :])[:, 0]
        reps.append(members[int(np.argmin(d))])
    return np.array(reps, dtype=np.int64)


def farthest_point_backfill(
    X: np.ndarray, selected: np.ndarray, target: int
) -> np.ndarray:
    """Grow ``selected`` to ``target`` distinct rows by farthest-point steps.

    Each step adds the unselected row whose distance to the nearest selected
    row is largest (ties to the lowest index). With no prior selection the
    first pick is row 0.
    """
    n = X.shape[0]
    sel = list(dict.fromkeys(int(i) for i in selected))
    if target > n:
        raise ValueError("target exceeds available rows")
    if not sel and target > 0:
        sel.append(0)
    is_sel = np.zeros(n, dtype=bool)
    is_sel[sel] = True
    if len(sel) < target:
        min_d = np.full(n, np.inf)
        for s in sel:
            min_d = np.minimum(min_d, _pairwise_sq_dists(X, X[s][None, :])[:, 0])
        while len(sel) < target:
            min_d[is_sel] = -np.inf
            pick = int(np.argmax(min_d))
            sel.append(pick)
            is_sel[pick] = True
            min_d = np.minimum(min_d, _pairwise_sq_dists(X, X[pick][None, :])[:, 0])
    return np.array(sel, dtype=np.int64)
