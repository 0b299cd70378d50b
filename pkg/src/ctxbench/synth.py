"""Synthetic imbalanced two-class tables for desk-scale benchmarking.

Two unit-variance Gaussian classes separated in two informative dimensions,
plus optional pure-noise dimensions that carry no class signal. The
minority count is exact, not sampled, so class ratios are reproducible.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError
from .tabular import ColumnKind, Table

DEFAULT_NOISE_DIMS = 8


def synth_dataset(
    n: int,
    minority_rate: float,
    separation: float,
    noise_dims: int = DEFAULT_NOISE_DIMS,
    seed: int = 0,
) -> Table:
    """Deterministic table with exactly round(n * minority_rate) minority rows.

    ``separation`` is the Euclidean distance between the class means in the
    informative plane; noise dimensions are standard normal for both
    classes.
    """
    if n < 10:
        raise ConfigError("n must be at least 10")
    if not 0.0 < minority_rate <= 0.5:
        raise ConfigError("minority_rate must be in (0, 0.5]")
    if separation < 0.0:
        raise ConfigError("separation must be >= 0")
    if noise_dims < 0:
        raise ConfigError("noise_dims must be >= 0")

    rng = np.random.Generator(np.random.PCG64(seed))
    n_minority = int(np.floor(n * minority_rate + 0.5))
    n_majority = n - n_minority
    offset = separation / np.sqrt(2.0)

    informative = rng.standard_normal((n, 2))
    labels = np.zeros(n)
    minority_pos = rng.choice(n, size=n_minority, replace=False)
    labels[minority_pos] = 1.0
    informative[minority_pos] += offset

    cols = [
        ("inf0", ColumnKind.NUMERIC, informative[:, 0]),
        ("inf1", ColumnKind.NUMERIC, informative[:, 1]),
    ]
    if noise_dims:
        noise = rng.standard_normal((n, noise_dims))
        cols.extend(
            (f"noise{j}", ColumnKind.NUMERIC, noise[:, j]) for j in range(noise_dims)
        )
    cols.append(("label", ColumnKind.NUMERIC, labels))
    return Table.from_columns(cols, label="label")


def synth_split(
    n: int,
    minority_rate: float,
    separation: float,
    noise_dims: int = DEFAULT_NOISE_DIMS,
    seed: int = 0,
    test_fraction: float = 0.25,
) -> tuple[Table, Table]:
    """Convenience: synthesize and stratified-split in one call."""
    from .ingest import RandomStratified, split

    table = synth_dataset(n, minority_rate, separation, noise_dims, seed)
    return split(table, RandomStratified(test_fraction, seed=seed + 1))
