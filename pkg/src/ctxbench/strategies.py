"""Seven seeded strategies for filling a bounded context window.

Every strategy is a pure function of (training table, parameters, seed):
the random engine is PCG64, named and fixed so identical inputs reproduce
identical windows across runs, platforms, and worker counts.

Strategy families:

* preserve the pool ratio: ``uniform``, ``stratified``
* rebalance the classes: ``balanced``, ``oversample_plus``, ``smote``
* cover the feature space: ``diversity_km``, and the ``hybrid`` mix of
  balanced draws with diversity selection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .clustering import (
    _pairwise_sq_dists,
    farthest_point_backfill,
    minibatch_kmeans,
    nearest_member_per_cluster,
)
from .encoding import FittedEncoder, fit_encoder
from .errors import BudgetError, ConfigError, DegenerateContextError
from .ingest import largest_remainder
from .tabular import ColumnKind, Table, class_counts

STRATEGIES = (
    "uniform",
    "stratified",
    "balanced",
    "oversample_plus",
    "smote",
    "diversity_km",
    "hybrid",
)

DEFAULT_BUDGET_GRID = (1024, 2048, 5000, 10000, 20000, 50000)


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True)
class ContextSpec:
    """A strategy plus its parameters, budget, and seed.

    ``budget >= 2`` is the grid-level contract (two classes need two rows);
    single-row windows are representable only for quota edge cases.
    """

    strategy: str
    budget: int
    seed: int = 0
    rho: float = 0.5
    boost: float = 2.0
    min_minority: int = 0
    smote_k: int = 5
    km_iterations: int = 100
    km_batch: int = 1024

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ConfigError(f"unknown strategy {self.strategy!r}")
        if self.budget < 1:
            raise ConfigError("budget must be positive")
        if not 0.0 <= self.rho <= 1.0:
            raise ConfigError("rho must be in [0, 1]")
        if self.boost < 1.0:
            raise ConfigError("boost must be >= 1")
        if self.smote_k < 1:
            raise ConfigError("smote_k must be >= 1")
        if not 0 <= self.min_minority <= self.budget:
            raise ConfigError("min_minority must be in [0, budget]")

    def params_dict(self) -> dict:
        extras = {
            "oversample_plus": {"boost": self.boost, "min_minority": self.min_minority},
            "smote": {"smote_k": self.smote_k},
            "diversity_km": {
                "km_iterations": self.km_iterations,
                "km_batch": self.km_batch,
            },
            "hybrid": {
                "rho": self.rho,
                "km_iterations": self.km_iterations,
                "km_batch": self.km_batch,
            },
        }
        return extras.get(self.strategy, {})


@dataclass(frozen=True)
class SyntheticOrigin:
    child_id: int
    parent_a: int
    parent_b: int
    lam: float


@dataclass(frozen=True)
class ContextWindow:
    """Selected (or synthesized) labeled rows plus provenance.

    ``rows`` may contain repeated row ids only for with-replacement
    strategies; synthetic rows appear only under SMOTE, flagged and with
    their generating pair recorded.
    """

    rows: Table
    spec: ContextSpec
    n_majority: int
    n_minority: int
    n_synthetic: int
    synthetic_origins: tuple[SyntheticOrigin, ...] = ()
    warnings: tuple[str, ...] = field(default=(), compare=False)

    @property
    def size(self) -> int:
        return self.rows.n_rows

    def row_id_list(self) -> list[int]:
        return self.rows.row_ids.tolist()


def _make_window(
    rows: Table,
    spec: ContextSpec,
    synthetic_origins: tuple[SyntheticOrigin, ...] = (),
    warnings: tuple[str, ...] = (),
) -> ContextWindow:
    y = rows.labels()
    return ContextWindow(
        rows=rows,
        spec=spec,
        n_majority=int(np.sum(y == 0)),
        n_minority=int(np.sum(y == 1)),
        n_synthetic=int(np.sum(rows.synthetic)),
        synthetic_origins=synthetic_origins,
        warnings=warnings,
    )


def _require_label(train: Table) -> np.ndarray:
    if train.label is None:
        raise ConfigError("training table has no label column")
    return train.labels()


# -- ratio-preserving strategies ------------------------------------------------


def sample_uniform(train: Table, m: int, seed: int) -> ContextWindow:
    """m distinct rows drawn uniformly without replacement."""
    _require_label(train)
    if m > train.n_rows:
        raise BudgetError(f"budget {m} exceeds pool size {train.n_rows}")
    rng = _rng(seed)
    positions = rng.choice(train.n_rows, size=m, replace=False)
    return _make_window(train.take(positions), ContextSpec("uniform", m, seed))


def stratified_quotas(n0: int, n1: int, m: int) -> tuple[int, int]:
    """Largest-remainder per-class quotas proportional to pool counts."""
    n = n0 + n1
    quotas = largest_remainder(np.array([n0 * m / n, n1 * m / n]), m)
    return int(quotas[0]), int(quotas[1])


def _draw_per_class(
    train: Table, y: np.ndarray, quotas: tuple[int, int], rng: np.random.Generator
) -> np.ndarray:
    parts = []
    for c, quota in zip((0, 1), quotas):
        members = np.flatnonzero(y == c)
        perm = rng.permutation(len(members))
        parts.append(members[perm[:quota]])
    return np.concatenate(parts)


def sample_stratified(train: Table, m: int, seed: int) -> ContextWindow:
    """Exact proportional per-class quotas, uniform within class."""
    y = _require_label(train)
    if m > train.n_rows:
        raise BudgetError(f"budget {m} exceeds pool size {train.n_rows}")
    counts = class_counts(train)
    quotas = stratified_quotas(counts.n0, counts.n1, m)
    positions = _draw_per_class(train, y, quotas, _rng(seed))
    return _make_window(train.take(positions), ContextSpec("stratified", m, seed))


# -- class-rebalancing strategies -------------------------------------------------


def balanced_quotas(n0: int, n1: int, m: int) -> tuple[int, int]:
    """Equal split of the budget; an odd leftover goes to the larger class.

    A class short of its quota contributes everything it has and the
    shortfall moves to the other class, up to that class's capacity.
    """
    base = m // 2
    q = [base, base]
    if m % 2 == 1:
        q[0 if n0 >= n1 else 1] += 1
    avail = [n0, n1]
    take = [min(q[0], avail[0]), min(q[1], avail[1])]
    for c in (0, 1):
        shortfall = m - take[0] - take[1]
        if shortfall <= 0:
            break
        room = avail[c] - take[c]
        take[c] += min(room, shortfall)
    return take[0], take[1]


def sample_balanced(train: Table, m: int, seed: int) -> ContextWindow:
    """Near-equal class representation, drawn without replacement."""
    y = _require_label(train)
    counts = class_counts(train)
    if counts.n0 == 0 or counts.n1 == 0:
        raise DegenerateContextError("balanced window needs both classes")
    quotas = balanced_quotas(counts.n0, counts.n1, m)
    positions = _draw_per_class(train, y, quotas, _rng(seed))
    return _make_window(train.take(positions), ContextSpec("balanced", m, seed))


def sample_oversample_plus(
    train: Table, m: int, boost: float, min_minority: int, seed: int
) -> ContextWindow:
    """Inverse-frequency weighted draws with replacement, plus a minority floor.

    Row weights are ``boost / n1`` for the minority and ``1 / n0`` for the
    majority, so ``boost`` multiplies the minority's total class mass. If the
    drawn window is below the minority floor, uniformly chosen majority draws
    are replaced with fresh minority draws until the floor is met. Repeated
    ids record multiplicity.
    """
    y = _require_label(train)
    if boost < 1.0:
        raise ConfigError("boost must be >= 1")
    if min_minority > m:
        raise ConfigError("min_minority cannot exceed the budget")
    counts = class_counts(train)
    if counts.n1 == 0:
        raise DegenerateContextError("oversample_plus needs a minority class")
    if counts.n0 == 0:
        raise DegenerateContextError("oversample_plus needs a majority class")
    rng = _rng(seed)
    weights = np.where(y == 1, boost / counts.n1, 1.0 / counts.n0)
    probs = weights / weights.sum()
    positions = rng.choice(train.n_rows, size=m, replace=True, p=probs)

    n_min = int(np.sum(y[positions] == 1))
    if n_min < min_minority:
        deficit = min_minority - n_min
        majority_slots = np.flatnonzero(y[positions] == 0)
        slots = rng.choice(len(majority_slots), size=deficit, replace=False)
        minority_rows = np.flatnonzero(y == 1)
        replacements = minority_rows[
            rng.integers(0, len(minority_rows), size=deficit)
        ]
        positions = positions.copy()
        positions[majority_slots[slots]] = replacements

    spec = ContextSpec(
        "oversample_plus", m, seed, boost=boost, min_minority=min_minority
    )
    return _make_window(train.take(positions, allow_duplicates=True), spec)


def _minority_knn(
    X_min: np.ndarray, k_eff: int
) -> np.ndarray:
    """k nearest minority neighbors per minority row (self excluded).

    Ties resolve by (distance, index); output shape (n_min, k_eff).
    """
    n = X_min.shape[0]
    out = np.empty((n, k_eff), dtype=np.int64)
    chunk = max(1, min(n, 4_000_000 // max(n, 1)))
    for start in range(0, n, chunk):
        block = _pairwise_sq_dists(X_min[start : start + chunk], X_min)
        for r in range(block.shape[0]):
            i = start + r
            d = block[r]
            order = np.lexsort((np.arange(n), d))
            order = order[order != i]
            out[i] = order[:k_eff]
    return out


def sample_smote(
    train: Table,
    m: int,
    k: int,
    seed: int,
    encoder: Optional[FittedEncoder] = None,
) -> ContextWindow:
    """Stratified base window topped up with interpolated synthetic minority.

    Starting from a stratified draw of min(m, n) rows, majority draws are
    truncated to ceil(m/2) and synthetic minority rows are generated until
    the minority side holds floor(m/2): each synthetic row interpolates a
    seeded-random minority member toward one of its k nearest minority
    neighbors (Euclidean in the standardized encoding) with lambda ~ U(0,1).
    Numeric and timestamp columns interpolate; categorical values copy the
    base member; synthetic rows carry label 1, fresh ids, and the
    generating pair.
    """
    y = _require_label(train)
    counts = class_counts(train)
    if counts.n1 < 2:
        raise DegenerateContextError(
            f"smote needs at least 2 minority rows, found {counts.n1}"
        )
    rng = _rng(seed)
    warnings: tuple[str, ...] = ()
    k_eff = min(k, counts.n1 - 1)
    if k_eff < k:
        warnings = (f"smote k clamped from {k} to {k_eff} (minority size {counts.n1})",)

    base_m = min(m, train.n_rows)
    quotas = stratified_quotas(counts.n0, counts.n1, base_m)
    target_min = m // 2
    target_maj = m - target_min

    # same draw stream as sample_stratified: class 0 permuted, then class 1
    maj_members = np.flatnonzero(y == 0)
    maj_pos = maj_members[rng.permutation(len(maj_members))[: quotas[0]]]
    min_pos = np.flatnonzero(y == 1)[rng.permutation(counts.n1)[: quotas[1]]]
    maj_keep = maj_pos[: min(len(maj_pos), target_maj)]
    min_keep = min_pos[: min(len(min_pos), target_min)]
    real = train.take(np.concatenate([maj_keep, min_keep]))

    synth_needed = target_min - len(min_keep)
    origins: list[SyntheticOrigin] = []
    if synth_needed > 0:
        if encoder is None:
            encoder = fit_encoder(train)
        minority_rows = np.flatnonzero(y == 1)
        X_min = encoder.transform_array(train.take(minority_rows))
        nn = _minority_knn(X_min, k_eff)

        picks = rng.integers(0, counts.n1, size=synth_needed)
        neigh = nn[picks, rng.integers(0, k_eff, size=synth_needed)]
        lams = rng.uniform(0.0, 1.0, size=synth_needed)

        base_ids = train.row_ids[minority_rows]
        next_id = int(train.row_ids.max()) + 1
        child_ids = next_id + np.arange(synth_needed, dtype=np.int64)
        cols = []
        for name, kind in zip(train.names, train.kinds):
            col = train.column(name)
            a, b = col[minority_rows[picks]], col[minority_rows[neigh]]
            if name == train.label:
                cols.append((name, kind, np.ones(synth_needed)))
            elif kind is ColumnKind.NUMERIC:
                cols.append((name, kind, a + lams * (b - a)))
            elif kind is ColumnKind.TIMESTAMP:
                ea = a.astype("datetime64[s]").astype(np.float64)
                eb = b.astype("datetime64[s]").astype(np.float64)
                interp = np.round(ea + lams * (eb - ea)).astype("int64")
                vals = interp.astype("datetime64[s]")
                vals[np.isnat(a) | np.isnat(b)] = np.datetime64("NaT")
                cols.append((name, kind, vals))
            else:
                cols.append((name, kind, a.copy()))
        synth = Table.from_columns(
            cols,
            label=train.label,
            row_ids=child_ids,
            synthetic=np.ones(synth_needed, dtype=bool),
        )
        origins = [
            SyntheticOrigin(
                child_id=int(child_ids[i]),
                parent_a=int(base_ids[picks[i]]),
                parent_b=int(base_ids[neigh[i]]),
                lam=float(lams[i]),
            )
            for i in range(synth_needed)
        ]
        real = real.append_rows(synth)

    spec = ContextSpec("smote", m, seed, smote_k=k)
    return _make_window(real, spec, tuple(origins), warnings)


# -- coverage-driven strategies ----------------------------------------------------


def sample_diversity_km(
    train: Table,
    m: int,
    seed: int,
    encoder: Optional[FittedEncoder] = None,
    iterations: int = 100,
    batch: int = 1024,
) -> ContextWindow:
    """One nearest-to-centroid representative per mini-batch k-means cluster.

    Clusters the standardized encoding of the whole pool into m clusters;
    empty clusters are backfilled with unselected rows farthest from any
    selected row. Labels are never consulted.
    """
    if m > train.n_rows:
        raise BudgetError(f"budget {m} exceeds pool size {train.n_rows}")
    if encoder is None:
        encoder = fit_encoder(train)
    X = encoder.transform_array(train)
    if m == train.n_rows:
        positions = np.arange(train.n_rows, dtype=np.int64)
    else:
        result = minibatch_kmeans(
            X, m, _rng(seed), iterations=iterations, batch_size=min(batch, train.n_rows)
        )
        reps = nearest_member_per_cluster(X, result)
        positions = farthest_point_backfill(X, reps, m)
    spec = ContextSpec(
        "diversity_km", m, seed, km_iterations=iterations, km_batch=batch
    )
    return _make_window(train.take(positions), spec)


def sample_hybrid(
    train: Table,
    m: int,
    rho: float,
    seed: int,
    encoder: Optional[FittedEncoder] = None,
    iterations: int = 100,
    batch: int = 1024,
) -> ContextWindow:
    """round(rho * m) balanced rows, the remainder by diversity selection
    over the rows not already taken."""
    if not 0.0 <= rho <= 1.0:
        raise ConfigError("rho must be in [0, 1]")
    spec = ContextSpec(
        "hybrid", m, seed, rho=rho, km_iterations=iterations, km_batch=batch
    )
    m_bal = int(math.floor(rho * m + 0.5))
    if m_bal == 0:
        inner = sample_diversity_km(
            train, m, seed, encoder=encoder, iterations=iterations, batch=batch
        )
        return replace(inner, spec=spec)
    balanced = sample_balanced(train, m_bal, seed)
    if m_bal >= m:
        return replace(balanced, spec=spec)

    taken = np.zeros(train.n_rows, dtype=bool)
    taken[train.positions_of(balanced.rows.row_ids)] = True
    rest = train.mask(~taken)
    m_div = min(m - balanced.size, rest.n_rows)
    if m_div == 0:
        return replace(balanced, spec=spec)
    if encoder is None:
        encoder = fit_encoder(train)
    diversity = sample_diversity_km(
        rest, m_div, seed, encoder=encoder, iterations=iterations, batch=batch
    )
    rows = balanced.rows.append_rows(diversity.rows)
    return _make_window(rows, spec)


# -- dispatch -----------------------------------------------------------------------


def build_context(
    train: Table, spec: ContextSpec, encoder: Optional[FittedEncoder] = None
) -> ContextWindow:
    """Build the window described by the spec (grid entry point)."""
    if spec.budget < 2:
        raise ConfigError("grid budgets must be >= 2")
    if spec.strategy == "uniform":
        return sample_uniform(train, spec.budget, spec.seed)
    if spec.strategy == "stratified":
        return sample_stratified(train, spec.budget, spec.seed)
    if spec.strategy == "balanced":
        return sample_balanced(train, spec.budget, spec.seed)
    if spec.strategy == "oversample_plus":
        return sample_oversample_plus(
            train, spec.budget, spec.boost, spec.min_minority, spec.seed
        )
    if spec.strategy == "smote":
        return sample_smote(train, spec.budget, spec.smote_k, spec.seed, encoder)
    if spec.strategy == "diversity_km":
        return sample_diversity_km(
            train,
            spec.budget,
            spec.seed,
            encoder=encoder,
            iterations=spec.km_iterations,
            batch=spec.km_batch,
        )
    if spec.strategy == "hybrid":
        return sample_hybrid(
            train,
            spec.budget,
            spec.rho,
            spec.seed,
            encoder=encoder,
            iterations=spec.km_iterations,
            batch=spec.km_batch,
        )
    raise ConfigError(f"unknown strategy {spec.strategy!r}")  # pragma: no cover
