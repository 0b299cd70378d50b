import numpy as np
import pytest

from ctxbench.tabular import ColumnKind, Table


def make_labeled_table(n0: int, n1: int, seed: int = 0, extra_dims: int = 2) -> Table:
    """Random numeric table with exact class counts, label 1 = minority-style."""
    rng = np.random.Generator(np.random.PCG64(seed))
    n = n0 + n1
    y = np.zeros(n)
    y[rng.choice(n, size=n1, replace=False)] = 1.0
    cols = [
        (f"x{j}", ColumnKind.NUMERIC, rng.standard_normal(n) + y * (j == 0))
        for j in range(extra_dims)
    ]
    cols.append(("label", ColumnKind.NUMERIC, y))
    return Table.from_columns(cols, label="label")


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(12345))


@pytest.fixture
def small_pool():
    return make_labeled_table(92, 8, seed=3)
