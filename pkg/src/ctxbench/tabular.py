"""Columnar tabular data model: typed schema, binary labels, stable row ids.

A :class:`Table` is an immutable column store. Numeric columns are float64
(NaN marks missing before imputation), categorical columns are object arrays
of ``str | None``, timestamp columns are ``datetime64[s]`` with NaT for
missing. Row ids are stable across filtering and sampling; synthetic rows
carry fresh ids and a synthetic flag.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from datetime import datetime
from typing import Iterable, Sequence

import numpy as np

from .errors import DataError, StructuralError


class ColumnKind(enum.Enum):
    NUMERIC = "numeric"
    CATEGORICAL = "categorical"
    TIMESTAMP = "timestamp"


def _freeze(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, copy=True)
    out.flags.writeable = False
    return out


def _as_column(kind: ColumnKind, values) -> np.ndarray:
    if kind is ColumnKind.NUMERIC:
        return np.asarray(values, dtype=np.float64)
    if kind is ColumnKind.TIMESTAMP:
        return np.asarray(values, dtype="datetime64[s]")
    return np.asarray(values, dtype=object)


@dataclass(frozen=True)
class Table:
    """Immutable columnar table with an optional binary label column.

    ``allow_duplicate_ids`` exists only for sampled windows built with
    replacement; source tables always have unique row ids.
    """

    names: tuple[str, ...]
    kinds: tuple[ColumnKind, ...]
    columns: tuple[np.ndarray, ...]
    row_ids: np.ndarray
    synthetic: np.ndarray
    label: str | None = None
    allow_duplicate_ids: bool = field(default=False, compare=False)

    def __post_init__(self):
        if len(self.names) == 0:
            raise StructuralError("table must have at least one column")
        if len(set(self.names)) != len(self.names):
            raise StructuralError("duplicate column names")
        if not (len(self.names) == len(self.kinds) == len(self.columns)):
            raise StructuralError("names/kinds/columns length mismatch")
        n = len(self.row_ids)
        for name, col in zip(self.names, self.columns):
            if len(col) != n:
                raise StructuralError(
                    f"column {name!r} has {len(col)} rows, expected {n}"
                )
        if len(self.synthetic) != n:
            raise StructuralError("synthetic flag length mismatch")
        if not self.allow_duplicate_ids and len(np.unique(self.row_ids)) != n:
            raise StructuralError("row ids are not unique")
        if self.label is not None:
            if self.label not in self.names:
                raise StructuralError(f"label column {self.label!r} not present")
            self._check_label_binary()
        for arr in (*self.columns, self.row_ids, self.synthetic):
            arr.flags.writeable = False

    def _check_label_binary(self) -> None:
        col = self.column(self.label)
        if self.kind(self.label) is not ColumnKind.NUMERIC:
            raise DataError(f"label column {self.label!r} must be numeric")
        bad = ~np.isin(col, (0.0, 1.0))
        if bad.any():
            rid = int(self.row_ids[np.argmax(bad)])
            raise DataError(
                f"label column {self.label!r} has non-binary value at row id {rid}"
            )

    @staticmethod
    def from_columns(
        cols: Sequence[tuple[str, ColumnKind, Iterable]],
        label: str | None = None,
        row_ids: np.ndarray | None = None,
        synthetic: np.ndarray | None = None,
    ) -> "Table":
        if not cols:
            raise StructuralError("empty column list")
        names = tuple(c[0] for c in cols)
        kinds = tuple(c[1] for c in cols)
        arrays = tuple(_freeze(_as_column(k, v)) for _, k, v in cols)
        n = len(arrays[0])
        if row_ids is None:
            row_ids = np.arange(n, dtype=np.int64)
        if synthetic is None:
            synthetic = np.zeros(n, dtype=bool)
        return Table(
            names=names,
            kinds=kinds,
            columns=arrays,
            row_ids=_freeze(np.asarray(row_ids, dtype=np.int64)),
            synthetic=_freeze(np.asarray(synthetic, dtype=bool)),
            label=label,
        )

    # -- accessors ---------------------------------------------------------

    @property
    def n_rows(self) -> int:
        return len(self.row_ids)

    def column(self, name: str) -> np.ndarray:
        try:
            return self.columns[self.names.index(name)]
        except ValueError:
            raise StructuralError(f"no column named {name!r}") from None

    def kind(self, name: str) -> ColumnKind:
        try:
            return self.kinds[self.names.index(name)]
        except ValueError:
            raise StructuralError(f"no column named {name!r}") from None

    def labels(self) -> np.ndarray:
        """Label values as an int64 array of 0/1."""
        if self.label is None:
            raise StructuralError("table has no label column")
        return self.column(self.label).astype(np.int64)

    def feature_names(self) -> tuple[str, ...]:
        return tuple(n for n in self.names if n != self.label)

    def positions_of(self, ids: np.ndarray) -> np.ndarray:
        """Positional indices of the given row ids (ids must all be present)."""
        order = np.argsort(self.row_ids, kind="stable")
        sorted_ids = self.row_ids[order]
        pos = np.searchsorted(sorted_ids, ids)
        if np.any(pos >= len(sorted_ids)) or np.any(sorted_ids[np.minimum(pos, len(sorted_ids) - 1)] != ids):
            raise DataError("some row ids are not present in the table")
        return order[pos]

    # -- constructive operations -------------------------------------------

    def take(self, indices, allow_duplicates: bool = False) -> "Table":
        """New table with rows at the given positions, ids preserved."""
        idx = np.asarray(indices, dtype=np.int64)
        return Table(
            names=self.names,
            kinds=self.kinds,
            columns=tuple(_freeze(col[idx]) for col in self.columns),
            row_ids=_freeze(self.row_ids[idx]),
            synthetic=_freeze(self.synthetic[idx]),
            label=self.label,
            allow_duplicate_ids=allow_duplicates,
        )

    def mask(self, keep: np.ndarray) -> "Table":
        return self.take(np.flatnonzero(keep))

    def with_column(self, name: str, kind: ColumnKind, values) -> "Table":
        if name in self.names:
            raise StructuralError(f"column {name!r} already exists")
        return replace(
            self,
            names=self.names + (name,),
            kinds=self.kinds + (kind,),
            columns=self.columns + (_freeze(_as_column(kind, values)),),
        )

    def replace_column(self, name: str, values) -> "Table":
        i = self.names.index(name)
        cols = list(self.columns)
        cols[i] = _freeze(_as_column(self.kinds[i], values))
        return replace(self, columns=tuple(cols))

    def append_rows(self, other: "Table", allow_duplicates: bool = False) -> "Table":
        """Concatenate rows of a schema-identical table."""
        if other.names != self.names or other.kinds != self.kinds:
            raise StructuralError("schema mismatch in append_rows")
        return Table(
            names=self.names,
            kinds=self.kinds,
            columns=tuple(
                _freeze(np.concatenate([a, b]))
                for a, b in zip(self.columns, other.columns)
            ),
            row_ids=_freeze(np.concatenate([self.row_ids, other.row_ids])),
            synthetic=_freeze(np.concatenate([self.synthetic, other.synthetic])),
            label=self.label,
            allow_duplicate_ids=allow_duplicates or self.allow_duplicate_ids,
        )

    def drop_columns(self, names: Iterable[str]) -> "Table":
        drop = set(names)
        keep = [i for i, n in enumerate(self.names) if n not in drop]
        if not keep:
            raise StructuralError("cannot drop every column")
        label = self.label if self.label not in drop else None
        return replace(
            self,
            names=tuple(self.names[i] for i in keep),
            kinds=tuple(self.kinds[i] for i in keep),
            columns=tuple(self.columns[i] for i in keep),
            label=label,
        )


@dataclass(frozen=True)
class ClassCounts:
    """Per-class row counts with the min-class imbalance ratio."""

    n0: int
    n1: int

    @property
    def total(self) -> int:
        return self.n0 + self.n1

    @property
    def ratio(self) -> float:
        if self.total == 0:
            return 0.0
        return min(self.n0, self.n1) / self.total


def class_counts(table: Table) -> ClassCounts:
    """Exact per-class counts of the binary label column."""
    y = table.labels()
    return ClassCounts(n0=int(np.sum(y == 0)), n1=int(np.sum(y == 1)))


def parse_timestamp(value: str, date_format: str) -> np.datetime64:
    return np.datetime64(datetime.strptime(value, date_format), "s")


def infer_schema(
    raw_columns: Sequence[tuple[str, Sequence[str]]],
    date_format: str | None = None,
    missing_tokens: Sequence[str] = ("", "NA"),
    numeric_threshold: float = 0.99,
) -> list[tuple[str, ColumnKind]]:
    """Assign a :class:`ColumnKind` to each raw string column.

    A column is Numeric when at least ``numeric_threshold`` of its non-missing
    entries parse as floats, Timestamp when every non-missing entry parses
    under ``date_format``, else Categorical. All-missing columns are
    Categorical.
    """
    if not raw_columns:
        raise StructuralError("empty column list")
    lengths = {len(values) for _, values in raw_columns}
    if len(lengths) != 1:
        raise StructuralError(f"ragged columns: lengths {sorted(lengths)}")
    if lengths == {0}:
        raise StructuralError("empty table")

    missing = set(missing_tokens)
    out: list[tuple[str, ColumnKind]] = []
    for name, values in raw_columns:
        present = [v for v in values if v not in missing]
        if not present:
            out.append((name, ColumnKind.CATEGORICAL))
            continue
        n_numeric = 0
        for v in present:
            try:
                float(v)
                n_numeric += 1
            except ValueError:
                pass
        if n_numeric / len(present) >= numeric_threshold:
            out.append((name, ColumnKind.NUMERIC))
            continue
        if date_format is not None:
            try:
                for v in present:
                    datetime.strptime(v, date_format)
            except ValueError:
                pass
            else:
                out.append((name, ColumnKind.TIMESTAMP))
                continue
        out.append((name, ColumnKind.CATEGORICAL))
    return out
