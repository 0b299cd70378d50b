import numpy as np

from ctxbench.strategies import sample_oversample_plus, sample_smote
from ctxbench.table_io import load_table, save_table
from ctxbench.tabular import ColumnKind, Table

from .conftest import make_labeled_table


def test_round_trip_exact(tmp_path):
    t = Table.from_columns(
        [
            ("a", ColumnKind.NUMERIC, [1.5, np.nan, -3.25, 0.1 + 0.2]),
            ("g", ColumnKind.CATEGORICAL, ["x", None, "y", "x"]),
            ("when", ColumnKind.TIMESTAMP,
             np.array(["2019-01-01", "NaT", "2020-06-30", "2019-03-03"],
                      dtype="datetime64[s]")),
            ("label", ColumnKind.NUMERIC, [0.0, 1.0, 0.0, 1.0]),
        ],
        label="label",
    )
    path = tmp_path / "t.csv"
    save_table(t, path)
    back = load_table(path)
    assert back.names == t.names
    assert back.kinds == t.kinds
    assert back.label == "label"
    assert np.array_equal(back.row_ids, t.row_ids)
    a, b = back.column("a"), t.column("a")
    assert np.array_equal(np.isnan(a), np.isnan(b))
    assert np.array_equal(a[~np.isnan(a)], b[~np.isnan(b)])  # repr round trip
    assert back.column("g").tolist() == t.column("g").tolist()
    assert np.array_equal(np.isnat(back.column("when")), np.isnat(t.column("when")))


def test_round_trip_window_with_duplicates(tmp_path):
    t = make_labeled_table(10, 5, seed=1)
    w = sample_oversample_plus(t, 40, boost=2.0, min_minority=0, seed=2)
    path = tmp_path / "w.csv"
    save_table(w.rows, path)
    back = load_table(path)
    assert back.row_ids.tolist() == w.rows.row_ids.tolist()
    assert back.allow_duplicate_ids


def test_round_trip_synthetic_flags(tmp_path):
    t = make_labeled_table(90, 10, seed=3)
    w = sample_smote(t, 40, k=3, seed=0)
    path = tmp_path / "s.csv"
    save_table(w.rows, path)
    back = load_table(path)
    assert np.array_equal(back.synthetic, w.rows.synthetic)
