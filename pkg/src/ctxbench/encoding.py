"""Numeric encoding of tables into a standardized feature matrix.

The encoder is fitted on a reference pool of rows and then applied to any
rows with the same schema: categorical levels, frequency maps, and
standardization statistics all come from the fit pool, so re-encoding the
same rows is bit-identical to slicing a previously encoded matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, StructuralError
from .tabular import ColumnKind, Table

STD_CLAMP = 1e-12


@dataclass(frozen=True)
class EncodingPolicy:
    """How columns expand to features.

    Categorical columns with at most ``onehot_cap`` distinct fit-pool levels
    expand to one-hot indicators; higher-cardinality columns map to their
    fit-pool relative frequency. Missing numeric entries become
    ``numeric_sentinel`` so the matrix is NaN-free.
    """

    onehot_cap: int = 32
    numeric_sentinel: float = -1.0


@dataclass(frozen=True)
class ColumnEncoding:
    """How one source column was expanded into matrix features."""

    source: str
    mode: str  # "numeric" | "timestamp" | "onehot" | "frequency"
    categories: tuple[str, ...] = ()
    frequencies: tuple[float, ...] = ()


@dataclass(frozen=True)
class EncodedMatrix:
    matrix: np.ndarray
    feature_names: tuple[str, ...]
    encoding_map: tuple[ColumnEncoding, ...]
    mean: np.ndarray
    std: np.ndarray
    row_ids: np.ndarray

    @property
    def n_rows(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_features(self) -> int:
        return self.matrix.shape[1]

    def slice_ids(self, ids: np.ndarray) -> np.ndarray:
        """Rows of the matrix for the given row ids (ids must be unique here)."""
        order = np.argsort(self.row_ids, kind="stable")
        pos = np.searchsorted(self.row_ids[order], ids)
        return self.matrix[order[pos]]


def _timestamp_to_seconds(col: np.ndarray, sentinel: float) -> np.ndarray:
    out = col.astype("datetime64[s]").astype(np.float64)
    out[np.isnat(col)] = sentinel
    return out


class FittedEncoder:
    """Encoder with frozen expansion and standardization statistics."""

    def __init__(
        self,
        policy: EncodingPolicy,
        encodings: tuple[ColumnEncoding, ...],
        feature_names: tuple[str, ...],
        mean: np.ndarray,
        std: np.ndarray,
    ):
        self.policy = policy
        self.encodings = encodings
        self.feature_names = feature_names
        self.mean = mean
        self.std = std
        self.mean.flags.writeable = False
        self.std.flags.writeable = False

    def _raw_matrix(self, table: Table) -> np.ndarray:
        blocks = []
        sent = self.policy.numeric_sentinel
        for enc in self.encodings:
            col = table.column(enc.source)
            if enc.mode == "numeric":
                vals = np.array(col, dtype=np.float64)
                vals[np.isnan(vals)] = sent
                blocks.append(vals[:, None])
            elif enc.mode == "timestamp":
                blocks.append(_timestamp_to_seconds(col, sent)[:, None])
            elif enc.mode == "onehot":
                block = np.zeros((len(col), len(enc.categories)))
                for j, cat in enumerate(enc.categories):
                    block[:, j] = col == cat  # unseen/missing stay all-zero
                blocks.append(block)
            elif enc.mode == "frequency":
                freq = dict(zip(enc.categories, enc.frequencies))
                blocks.append(
                    np.array([freq.get(v, 0.0) for v in col], dtype=np.float64)[:, None]
                )
            else:  # pragma: no cover
                raise AssertionError(enc.mode)
        return np.hstack(blocks)

    def transform(self, table: Table) -> EncodedMatrix:
        raw = self._raw_matrix(table)
        std = (raw - self.mean) / self.std
        std.flags.writeable = False
        return EncodedMatrix(
            matrix=std,
            feature_names=self.feature_names,
            encoding_map=self.encodings,
            mean=self.mean,
            std=self.std,
            row_ids=table.row_ids,
        )

    def transform_array(self, table: Table) -> np.ndarray:
        return self.transform(table).matrix


def fit_encoder(
    table: Table,
    policy: EncodingPolicy = EncodingPolicy(),
    fit_ids: np.ndarray | None = None,
) -> FittedEncoder:
    """Fit expansion and standardization on the given reference pool.

    ``fit_ids`` selects the pool by row id; default is every row. The label
    column is never encoded.
    """
    if fit_ids is None:
        pool = table
    else:
        fit_ids = np.asarray(fit_ids, dtype=np.int64)
        if len(fit_ids) == 0:
            raise ConfigError("empty fit pool")
        pool = table.take(table.positions_of(fit_ids))
    if pool.n_rows == 0:
        raise ConfigError("empty fit pool")

    encodings: list[ColumnEncoding] = []
    names: list[str] = []
    for name, kind in zip(table.names, table.kinds):
        if name == table.label:
            continue
        col = pool.column(name)
        if kind is ColumnKind.NUMERIC:
            encodings.append(ColumnEncoding(source=name, mode="numeric"))
            names.append(name)
        elif kind is ColumnKind.TIMESTAMP:
            encodings.append(ColumnEncoding(source=name, mode="timestamp"))
            names.append(name)
        else:
            cats = sorted({v for v in col if v is not None})
            if len(cats) <= policy.onehot_cap:
                encodings.append(
                    ColumnEncoding(source=name, mode="onehot", categories=tuple(cats))
                )
                names.extend(f"{name}={c}" for c in cats)
            else:
                counts = {c: 0 for c in cats}
                for v in col:
                    if v is not None:
                        counts[v] += 1
                encodings.append(
                    ColumnEncoding(
                        source=name,
                        mode="frequency",
                        categories=tuple(cats),
                        frequencies=tuple(counts[c] / pool.n_rows for c in cats),
                    )
                )
                names.append(f"{name}#freq")
    if not encodings:
        raise StructuralError("no encodable columns (label-only table)")

    proto = FittedEncoder(
        policy, tuple(encodings), tuple(names),
        mean=np.zeros(len(names)), std=np.ones(len(names)),
    )
    raw = proto._raw_matrix(pool)
    mean = raw.mean(axis=0)
    std = raw.std(axis=0)  # population std
    std = np.where(std < STD_CLAMP, 1.0, std)
    return FittedEncoder(policy, tuple(encodings), tuple(names), mean, std)


def encode(
    table: Table,
    policy: EncodingPolicy = EncodingPolicy(),
    fit_ids: np.ndarray | None = None,
) -> EncodedMatrix:
    """Fit on ``fit_ids`` (default: all rows) and encode the whole table."""
    return fit_encoder(table, policy, fit_ids).transform(table)
