"""Native reference predictors conditioning on a context window.

The shared contract: ``condition(window)`` returns an immutable fitted
state, ``predict_proba(state, queries)`` returns one class-1 probability
per query row, deterministically. Each predictor fits its own encoder on
the window, so query scoring never sees statistics from outside the
context.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Protocol, runtime_checkable

import numpy as np

from .encoding import EncodingPolicy, FittedEncoder, fit_encoder
from .errors import ContractError
from .strategies import ContextSpec, ContextWindow
from .tabular import ColumnKind, Table

KNN_DISTANCE_EPS = 1e-9
NB_VAR_FLOOR = 1e-6
LOGISTIC_L2 = 1e-2
LOGISTIC_TOL = 1e-6
LOGISTIC_MAX_EPOCHS = 500


@runtime_checkable
class Predictor(Protocol):
    name: str
    version: str

    def condition(self, window: ContextWindow): ...

    def predict_proba(self, state, queries: Table) -> np.ndarray: ...


def window_from_arrays(
    X: np.ndarray, y: np.ndarray, feature_names=None
) -> ContextWindow:
    """Wrap plain arrays as a numeric-only window (testing and selection)."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    names = (
        tuple(feature_names)
        if feature_names is not None
        else tuple(f"f{i}" for i in range(X.shape[1]))
    )
    cols = [(n, ColumnKind.NUMERIC, X[:, i]) for i, n in enumerate(names)]
    cols.append(("label", ColumnKind.NUMERIC, y))
    table = Table.from_columns(cols, label="label")
    spec = ContextSpec("uniform", max(2, len(y)), 0)
    return ContextWindow(
        rows=table,
        spec=spec,
        n_majority=int(np.sum(y == 0)),
        n_minority=int(np.sum(y == 1)),
        n_synthetic=0,
    )


def _fit_window(
    window: ContextWindow, policy: EncodingPolicy
) -> tuple[FittedEncoder, np.ndarray, np.ndarray]:
    if window.rows.n_rows == 0:
        raise ContractError("empty context window")
    encoder = fit_encoder(window.rows, policy)
    X = encoder.transform_array(window.rows)
    y = window.rows.labels()
    return encoder, X, y


# -- k nearest neighbours --------------------------------------------------------


@dataclass(frozen=True)
class KnnState:
    encoder: FittedEncoder
    X: np.ndarray
    y: np.ndarray
    k: int
    weighted: bool
    warnings: tuple[str, ...] = ()


class ContextKnn:
    """Class-1 share among the k nearest window rows.

    Distance ties at the k-th neighbour contribute fractionally, which makes
    the score independent of window row order. Optional 1/(d+eps) distance
    weighting.
    """

    name = "context-knn"
    version = "1"

    def __init__(
        self,
        k: int | None = None,
        weighted: bool = False,
        policy: EncodingPolicy = EncodingPolicy(),
    ):
        self.k = k
        self.weighted = weighted
        self.policy = policy

    def condition(self, window: ContextWindow) -> KnnState:
        encoder, X, y = _fit_window(window, self.policy)
        k = self.k if self.k is not None else math.ceil(math.sqrt(len(y)))
        if k > len(y):
            raise ContractError(f"k={k} exceeds window size {len(y)}")
        return KnnState(encoder, X, y, k, self.weighted)

    def predict_proba(self, state: KnnState, queries: Table) -> np.ndarray:
        Q = state.encoder.transform_array(queries)
        out = np.empty(Q.shape[0])
        chunk = max(1, 4_000_000 // max(1, state.X.shape[0]))
        for start in range(0, Q.shape[0], chunk):
            block = _sq_dists(Q[start : start + chunk], state.X)
            for r in range(block.shape[0]):
                out[start + r] = _knn_score(
                    block[r], state.y, state.k, state.weighted
                )
        return out


def _sq_dists(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    aa = np.sum(A * A, axis=1)[:, None]
    bb = np.sum(B * B, axis=1)[None, :]
    d = aa + bb - 2.0 * (A @ B.T)
    np.maximum(d, 0.0, out=d)
    return d


def _knn_score(d2: np.ndarray, y: np.ndarray, k: int, weighted: bool) -> float:
    kth = np.partition(d2, k - 1)[k - 1]
    inner = d2 < kth
    boundary = d2 == kth
    n_boundary = int(np.sum(boundary))
    slots = k - int(np.sum(inner))
    frac = slots / n_boundary if n_boundary else 0.0
    if weighted:
        w = 1.0 / (np.sqrt(d2) + KNN_DISTANCE_EPS)
    else:
        w = np.ones_like(d2)
    pos = y == 1
    num = float(np.sum(w[inner & pos])) + frac * float(np.sum(w[boundary & pos]))
    den = float(np.sum(w[inner])) + frac * float(np.sum(w[boundary]))
    return num / den if den > 0 else 0.0


# -- Gaussian naive Bayes -----------------------------------------------------------


@dataclass(frozen=True)
class GaussianNbState:
    encoder: FittedEncoder
    mean: np.ndarray  # (2, f)
    var: np.ndarray  # (2, f)
    log_prior: np.ndarray  # (2,)
    warnings: tuple[str, ...] = ()


class ContextGaussianNB:
    """Per-feature Gaussians per class with floored variances; posteriors use
    window class frequencies as priors."""

    name = "context-gnb"
    version = "1"

    def __init__(
        self, var_floor: float = NB_VAR_FLOOR, policy: EncodingPolicy = EncodingPolicy()
    ):
        self.var_floor = var_floor
        self.policy = policy

    def condition(self, window: ContextWindow) -> GaussianNbState:
        encoder, X, y = _fit_window(window, self.policy)
        if len(np.unique(y)) < 2:
            raise ContractError("gaussian nb needs both classes in the window")
        mean = np.empty((2, X.shape[1]))
        var = np.empty((2, X.shape[1]))
        prior = np.empty(2)
        for c in (0, 1):
            rows = X[y == c]
            mean[c] = rows.mean(axis=0)
            var[c] = np.maximum(rows.var(axis=0), self.var_floor)
            prior[c] = len(rows) / len(y)
        return GaussianNbState(encoder, mean, var, np.log(prior))

    def predict_proba(self, state: GaussianNbState, queries: Table) -> np.ndarray:
        Q = state.encoder.transform_array(queries)
        log_post = np.empty((Q.shape[0], 2))
        for c in (0, 1):
            z = (Q - state.mean[c]) ** 2 / state.var[c]
            log_post[:, c] = state.log_prior[c] - 0.5 * np.sum(
                np.log(2.0 * np.pi * state.var[c]) + z, axis=1
            )
        top = log_post.max(axis=1, keepdims=True)
        p = np.exp(log_post - top)
        return p[:, 1] / p.sum(axis=1)


# -- logistic regression --------------------------------------------------------------


@dataclass(frozen=True)
class LogisticState:
    encoder: FittedEncoder
    weights: np.ndarray  # (f,)
    intercept: float
    converged: bool
    warnings: tuple[str, ...] = ()


def _logistic_loss_grad(
    w: np.ndarray, X: np.ndarray, y: np.ndarray, l2: float
) -> tuple[float, np.ndarray]:
    """Mean log-loss plus 0.5 * l2 * ||coef||^2 (intercept unpenalized).

    ``w`` packs [intercept, coef...].
    """
    n = X.shape[0]
    z = w[0] + X @ w[1:]
    # log(1 + e^z) computed stably for both signs
    loss = float(np.mean(np.maximum(z, 0.0) - z * y + np.log1p(np.exp(-np.abs(z)))))
    loss += 0.5 * l2 * float(w[1:] @ w[1:])
    p = 1.0 / (1.0 + np.exp(-z))
    resid = (p - y) / n
    grad = np.empty_like(w)
    grad[0] = float(np.sum(resid))
    grad[1:] = X.T @ resid + l2 * w[1:]
    return loss, grad


class ContextLogistic:
    """L2-regularized logistic regression fitted on the window only.

    Full-batch gradient descent with backtracking line search from a zero
    start; stops when the gradient norm falls below the tolerance or the
    epoch budget runs out (non-convergence sets a warning, not an error).
    """

    name = "context-logistic"
    version = "1"

    def __init__(
        self,
        l2: float = LOGISTIC_L2,
        max_epochs: int = LOGISTIC_MAX_EPOCHS,
        tol: float = LOGISTIC_TOL,
        policy: EncodingPolicy = EncodingPolicy(),
    ):
        self.l2 = l2
        self.max_epochs = max_epochs
        self.tol = tol
        self.policy = policy

    def condition(self, window: ContextWindow) -> LogisticState:
        encoder, X, y = _fit_window(window, self.policy)
        if len(np.unique(y)) < 2:
            raise ContractError("logistic fit needs both classes in the window")
        yf = y.astype(np.float64)
        w = np.zeros(X.shape[1] + 1)
        step = 1.0
        converged = False
        loss, grad = _logistic_loss_grad(w, X, yf, self.l2)
        for _ in range(self.max_epochs):
            if float(np.linalg.norm(grad)) <= self.tol:
                converged = True
                break
            step = min(step * 2.0, 1e4)
            g2 = float(grad @ grad)
            stalled = False
            while True:
                cand = w - step * grad
                cand_loss, cand_grad = _logistic_loss_grad(cand, X, yf, self.l2)
                if cand_loss <= loss - 0.5 * step * g2:
                    break
                if step < 1e-12:
                    stalled = True
                    break
                step *= 0.5
            if stalled:
                break
            w, loss, grad = cand, cand_loss, cand_grad
        else:
            converged = float(np.linalg.norm(grad)) <= self.tol
        warnings = () if converged else ("logistic fit did not converge",)
        return LogisticState(
            encoder, w[1:].copy(), float(w[0]), converged, warnings
        )

    def predict_proba(self, state: LogisticState, queries: Table) -> np.ndarray:
        Q = state.encoder.transform_array(queries)
        z = state.intercept + Q @ state.weights
        return 1.0 / (1.0 + np.exp(-z))


NATIVE_PREDICTORS = {
    "knn": ContextKnn,
    "gaussian_nb": ContextGaussianNB,
    "logistic": ContextLogistic,
}
