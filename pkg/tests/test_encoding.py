import numpy as np
import pytest

from ctxbench.encoding import EncodingPolicy, encode, fit_encoder
from ctxbench.errors import ConfigError
from ctxbench.tabular import ColumnKind, Table

from .conftest import make_labeled_table


def mixed_table():
    return Table.from_columns(
        [
            ("amount", ColumnKind.NUMERIC, [0.0, 10.0, 5.0, np.nan]),
            ("grade", ColumnKind.CATEGORICAL, ["A", "B", "A", None]),
            ("when", ColumnKind.TIMESTAMP,
             np.array(["2019-01-01", "2019-06-30", "2019-03-01", "2019-02-01"],
                      dtype="datetime64[s]")),
            ("label", ColumnKind.NUMERIC, [0.0, 1.0, 0.0, 1.0]),
        ],
        label="label",
    )


class TestEncode:
    def test_two_point_numeric_standardizes_to_unit(self):
        t = Table.from_columns([("a", ColumnKind.NUMERIC, [0.0, 10.0])])
        m = encode(t)
        # population mean 5, std 5
        assert m.matrix[:, 0].tolist() == [-1.0, 1.0]

    def test_onehot_definition(self):
        t = Table.from_columns([("g", ColumnKind.CATEGORICAL, ["A", "B"])])
        m = encode(t)
        assert m.feature_names == ("g=A", "g=B")
        raw = m.matrix * m.std + m.mean
        assert raw[0].tolist() == [1.0, 0.0]
        assert raw[1].tolist() == [0.0, 1.0]

    def test_constant_column_maps_to_zero(self):
        t = Table.from_columns([("a", ColumnKind.NUMERIC, [7.0, 7.0, 7.0])])
        m = encode(t)
        assert np.all(m.matrix == 0.0)

    def test_fit_pool_statistics_mean_zero_std_one(self):
        t = make_labeled_table(40, 10, seed=4)
        fit_ids = t.row_ids[:25]
        enc = fit_encoder(t, fit_ids=fit_ids)
        pool_matrix = enc.transform_array(t.take(t.positions_of(fit_ids)))
        assert np.allclose(pool_matrix.mean(axis=0), 0.0, atol=1e-9)
        assert np.allclose(pool_matrix.std(axis=0), 1.0, atol=1e-9)

    def test_high_cardinality_goes_frequency(self):
        values = [f"c{i}" for i in range(40)]
        t = Table.from_columns([("g", ColumnKind.CATEGORICAL, values)])
        m = encode(t, EncodingPolicy(onehot_cap=32))
        assert m.feature_names == ("g#freq",)

    def test_unseen_category_all_zeros(self):
        t_fit = Table.from_columns([("g", ColumnKind.CATEGORICAL, ["A", "B", "A"])])
        enc = fit_encoder(t_fit)
        t_new = Table.from_columns([("g", ColumnKind.CATEGORICAL, ["C"])])
        raw = enc._raw_matrix(t_new)
        assert raw.tolist() == [[0.0, 0.0]]

    def test_missing_numeric_becomes_sentinel(self):
        t = mixed_table()
        enc = fit_encoder(t)
        raw = enc._raw_matrix(t)
        amount_col = list(enc.feature_names).index("amount")
        assert raw[3, amount_col] == -1.0
        assert not np.isnan(raw).any()

    def test_label_column_never_encoded(self):
        t = mixed_table()
        enc = fit_encoder(t)
        assert all("label" not in n for n in enc.feature_names)

    def test_empty_fit_pool_rejected(self):
        t = mixed_table()
        with pytest.raises(ConfigError):
            fit_encoder(t, fit_ids=np.array([], dtype=np.int64))


class TestDeterminism:
    def test_reencoding_is_bit_identical(self):
        t = make_labeled_table(30, 10, seed=5)
        a = encode(t)
        b = encode(t)
        assert a.matrix.tobytes() == b.matrix.tobytes()
        assert a.feature_names == b.feature_names

    def test_roundtrip_sample_then_encode_equals_slice(self):
        t = mixed_table()
        enc = fit_encoder(t)
        full = enc.transform(t)
        ids = np.array([3, 1])
        sampled = t.take(t.positions_of(ids))
        resliced = enc.transform(sampled)
        assert resliced.matrix.tobytes() == full.slice_ids(ids).tobytes()

    def test_timestamps_standardized(self):
        t = mixed_table()
        m = encode(t)
        when_col = list(m.feature_names).index("when")
        col = m.matrix[:, when_col]
        assert np.argmax(col) == 1  # 2019-06-30 is the latest
