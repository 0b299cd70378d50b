"""Independent reference implementations the fast paths are checked against.

Everything here is deliberately naive: quadratic pair scans, exact
arithmetic, tiny brute-force searches. None of it shares code with the
package internals it verifies.
"""

import itertools

import mpmath
import numpy as np


def auc_all_pairs(scores, labels) -> float:
    """O(n_pos * n_neg) pair scan with half credit for ties."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    pos = scores[labels == 1]
    neg = scores[labels == 0]
    total = 0.0
    for p in pos:
        for q in neg:
            if p > q:
                total += 1.0
            elif p == q:
                total += 0.5
    return total / (len(pos) * len(neg))


def auc_all_pairs_vectorized(scores, labels) -> float:
    """Same all-pairs statistic as :func:`auc_all_pairs`, broadcast over the
    full pos x neg comparison matrix (no ranking shortcut)."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    pos = scores[labels == 1][:, None]
    neg = scores[labels == 0][None, :]
    wins = np.sum(pos > neg) + 0.5 * np.sum(pos == neg)
    return float(wins) / (pos.shape[0] * neg.shape[1])


def mcc_exact(tp: int, fp: int, fn: int, tn: int) -> float:
    """High-precision MCC from exact integer factors."""
    den2 = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
    if den2 == 0:
        return 0.0
    with mpmath.workdps(60):
        value = mpmath.mpf(tp * tn - fp * fn) / mpmath.sqrt(mpmath.mpf(den2))
        return float(value)


def vif_from_correlation(corr: np.ndarray) -> np.ndarray:
    """VIFs as the diagonal of the inverse correlation matrix."""
    return np.diag(np.linalg.inv(corr))


def distance_to_segment(p, a, b) -> float:
    """Euclidean distance from point p to segment [a, b]."""
    p, a, b = (np.asarray(v, dtype=np.float64) for v in (p, a, b))
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0.0:
        return float(np.linalg.norm(p - a))
    t = float((p - a) @ ab) / denom
    t = min(1.0, max(0.0, t))
    return float(np.linalg.norm(p - (a + t * ab)))


def best_two_means(X: np.ndarray) -> tuple[set, set]:
    """Exhaustive 2-means on a tiny point set: the partition minimizing
    within-cluster squared distance to the cluster mean."""
    n = len(X)
    best = None
    best_cost = np.inf
    for size in range(1, n // 2 + 1):
        for combo in itertools.combinations(range(n), size):
            a = set(combo)
            b = set(range(n)) - a
            cost = 0.0
            for group in (a, b):
                pts = X[sorted(group)]
                mu = pts.mean(axis=0)
                cost += float(np.sum((pts - mu) ** 2))
            if cost < best_cost:
                best_cost = cost
                best = (a, b)
    return best


def mutual_information_table(joint: np.ndarray) -> float:
    """MI in bits from an explicit joint count table."""
    joint = np.asarray(joint, dtype=np.float64)
    p = joint / joint.sum()
    px = p.sum(axis=1)
    py = p.sum(axis=0)
    total = 0.0
    for i in range(p.shape[0]):
        for j in range(p.shape[1]):
            if p[i, j] > 0:
                total += p[i, j] * np.log2(p[i, j] / (px[i] * py[j]))
    return total
