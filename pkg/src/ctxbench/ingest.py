"""CSV ingestion, sentinel imputation, ratio feature engineering, splits.

Missingness is informative in credit data, so imputation writes sentinel
values (numeric -1 by default) and optional missing-indicator columns
instead of statistical estimates. Splits are either seeded stratified
random or temporal with a hard cutoff.
"""

from __future__ import annotations

import csv
import fnmatch
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .errors import ConfigError, DataError, LeakageError, StructuralError
from .tabular import ColumnKind, Table, infer_schema, parse_timestamp

DEFAULT_MISSING_TOKENS = ("", "NA")


# -- CSV loading -------------------------------------------------------------


def load_csv(
    path: Union[str, Path],
    schema_hints: dict[str, ColumnKind] | None = None,
    date_format: str = "%Y-%m-%d",
    delimiter: str = ",",
    missing_tokens: Sequence[str] = DEFAULT_MISSING_TOKENS,
    label: str | None = None,
    relabel_minority: bool = True,
) -> Table:
    """Load a header-ed CSV into a typed :class:`Table`.

    Empty strings and ``missing_tokens`` become missing markers. With a
    label column, values must be binary and class 1 is forced to be the
    minority (relabel recorded by flipping 0/1) unless ``relabel_minority``
    is off.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        try:
            header = next(reader)
        except StopIteration:
            raise StructuralError(f"{path}: empty file") from None
        if len(set(header)) != len(header):
            dupes = sorted({h for h in header if header.count(h) > 1})
            raise StructuralError(f"{path}: duplicate header names {dupes}")
        rows: list[list[str]] = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise StructuralError(
                    f"{path}: line {lineno}: expected {len(header)} fields, got {len(row)}"
                )
            rows.append(row)
    if not rows:
        raise StructuralError(f"{path}: no data rows")

    raw_cols = [(name, [r[i] for r in rows]) for i, name in enumerate(header)]
    schema = dict(infer_schema(raw_cols, date_format, missing_tokens))
    if schema_hints:
        for name, kind in schema_hints.items():
            if name not in schema:
                raise ConfigError(f"schema hint for unknown column {name!r}")
            schema[name] = kind

    missing = set(missing_tokens)
    cols = []
    for name, values in raw_cols:
        kind = schema[name]
        if kind is ColumnKind.NUMERIC:
            parsed = np.full(len(values), np.nan)
            for i, v in enumerate(values):
                if v in missing:
                    continue
                try:
                    parsed[i] = float(v)
                except ValueError:
                    pass  # <1% unparseable entries under inference: missing
            cols.append((name, kind, parsed))
        elif kind is ColumnKind.TIMESTAMP:
            stamps = np.full(len(values), np.datetime64("NaT"), dtype="datetime64[s]")
            for i, v in enumerate(values):
                if v in missing:
                    continue
                try:
                    stamps[i] = parse_timestamp(v, date_format)
                except ValueError:
                    raise DataError(
                        f"{path}: line {i + 2}: column {name!r}: "
                        f"{v!r} does not parse under {date_format!r}"
                    ) from None
            cols.append((name, kind, stamps))
        else:
            cols.append(
                (name, kind, np.array([None if v in missing else v for v in values], dtype=object))
            )

    table = Table.from_columns(cols, label=None)
    if label is not None:
        table = attach_label(table, label, relabel_minority=relabel_minority)
    return table


def attach_label(table: Table, label: str, relabel_minority: bool = True) -> Table:
    """Designate a binary label column, relabeling so class 1 is the minority."""
    if label not in table.names:
        raise StructuralError(f"label column {label!r} not present")
    col = table.column(label)
    if table.kind(label) is not ColumnKind.NUMERIC:
        raise DataError(f"label column {label!r} must be numeric")
    if np.isnan(col).any():
        rid = int(table.row_ids[np.argmax(np.isnan(col))])
        raise DataError(f"label column {label!r} missing at row id {rid}")
    bad = ~np.isin(col, (0.0, 1.0))
    if bad.any():
        rid = int(table.row_ids[np.argmax(bad)])
        raise DataError(f"label column {label!r} has non-binary value at row id {rid}")
    if relabel_minority and np.mean(col) > 0.5:
        table = table.replace_column(label, 1.0 - col)
    from dataclasses import replace

    return replace(table, label=label)


# -- imputation ---------------------------------------------------------------


@dataclass(frozen=True)
class NumericSentinel:
    value: float = -1.0


@dataclass(frozen=True)
class CategoryToken:
    token: str = "MISSING"


@dataclass(frozen=True)
class AddMissingIndicator:
    suffix: str = "__missing"


ImputationAction = Union[NumericSentinel, CategoryToken, AddMissingIndicator]


@dataclass(frozen=True)
class ImputationRule:
    """Columns matching ``pattern`` (fnmatch) get the action applied."""

    pattern: str
    action: ImputationAction


def _missing_mask(table: Table, name: str) -> np.ndarray:
    col = table.column(name)
    kind = table.kind(name)
    if kind is ColumnKind.NUMERIC:
        return np.isnan(col)
    if kind is ColumnKind.TIMESTAMP:
        return np.isnat(col)
    return np.array([v is None for v in col], dtype=bool)


def impute(table: Table, rules: Sequence[ImputationRule]) -> Table:
    """Apply sentinel/token/indicator rules in declaration order.

    Indicator columns reflect missingness as of entry (so the operation is
    idempotent: an existing indicator column is left untouched). At most one
    sentinel-type action may target a column.
    """
    original_missing = {name: _missing_mask(table, name) for name in table.names}
    sentinel_applied: set[str] = set()
    out = table
    for rule in rules:
        matched = [n for n in table.names if fnmatch.fnmatchcase(n, rule.pattern)]
        if not matched:
            raise ConfigError(f"imputation rule matches no column: {rule.pattern!r}")
        for name in matched:
            miss = original_missing[name]
            act = rule.action
            if isinstance(act, NumericSentinel):
                if table.kind(name) is not ColumnKind.NUMERIC:
                    raise ConfigError(f"NumericSentinel on non-numeric column {name!r}")
                if name in sentinel_applied:
                    raise ConfigError(f"two sentinel actions target column {name!r}")
                sentinel_applied.add(name)
                col = np.array(out.column(name))
                col[np.isnan(col)] = act.value
                out = out.replace_column(name, col)
            elif isinstance(act, CategoryToken):
                if table.kind(name) is not ColumnKind.CATEGORICAL:
                    raise ConfigError(f"CategoryToken on non-categorical column {name!r}")
                if name in sentinel_applied:
                    raise ConfigError(f"two sentinel actions target column {name!r}")
                sentinel_applied.add(name)
                col = np.array(out.column(name), dtype=object)
                col[[v is None for v in col]] = act.token
                out = out.replace_column(name, col)
            elif isinstance(act, AddMissingIndicator):
                indicator = f"{name}{act.suffix}"
                if indicator in out.names:
                    continue
                out = out.with_column(
                    indicator, ColumnKind.NUMERIC, miss.astype(np.float64)
                )
            else:  # pragma: no cover
                raise ConfigError(f"unknown action {act!r}")
    return out


# -- feature engineering -------------------------------------------------------


@dataclass(frozen=True)
class Ratio:
    numerator: str
    denominator: str


@dataclass(frozen=True)
class Difference:
    a: str
    b: str


@dataclass(frozen=True)
class Flag:
    column: str
    op: str  # one of > >= < <= == !=
    value: float


RecipeKind = Union[Ratio, Difference, Flag]

_FLAG_OPS = {
    ">": np.greater,
    ">=": np.greater_equal,
    "<": np.less,
    "<=": np.less_equal,
    "==": np.equal,
    "!=": np.not_equal,
}


@dataclass(frozen=True)
class FeatureRecipe:
    """Declarative derived feature over existing numeric columns."""

    new_name: str
    kind: RecipeKind
    zero_denominator_policy: float = -1.0


def _numeric_operand(table: Table, name: str) -> np.ndarray:
    if name not in table.names:
        raise ConfigError(f"recipe references unknown column {name!r}")
    if table.kind(name) is not ColumnKind.NUMERIC:
        raise ConfigError(f"recipe operand {name!r} is not numeric")
    return table.column(name)


def engineer(
    table: Table,
    recipes: Sequence[FeatureRecipe],
    missing_sentinel: float = -1.0,
) -> Table:
    """Append derived columns; originals are untouched.

    Ratio denominators equal to zero, NaN, or the missing sentinel yield the
    recipe's ``zero_denominator_policy`` value.
    """
    out = table
    for recipe in recipes:
        if recipe.new_name in out.names:
            raise ConfigError(f"derived column {recipe.new_name!r} already exists")
        k = recipe.kind
        if isinstance(k, Ratio):
            num = _numeric_operand(out, k.numerator)
            den = _numeric_operand(out, k.denominator)
            invalid = (den == 0.0) | np.isnan(den) | (den == missing_sentinel)
            values = np.full(len(den), recipe.zero_denominator_policy)
            np.divide(num, den, out=values, where=~invalid)
        elif isinstance(k, Difference):
            values = _numeric_operand(out, k.a) - _numeric_operand(out, k.b)
        elif isinstance(k, Flag):
            if k.op not in _FLAG_OPS:
                raise ConfigError(f"unknown flag op {k.op!r}")
            values = _FLAG_OPS[k.op](_numeric_operand(out, k.column), k.value).astype(
                np.float64
            )
        else:  # pragma: no cover
            raise ConfigError(f"unknown recipe kind {k!r}")
        out = out.with_column(recipe.new_name, ColumnKind.NUMERIC, values)
    return out


# -- splitting ------------------------------------------------------------------


@dataclass(frozen=True)
class RandomStratified:
    test_fraction: float
    seed: int = 0


@dataclass(frozen=True)
class Temporal:
    column: str
    cutoff: str  # parsed under date_format
    date_format: str = "%Y-%m-%d"


SplitSpec = Union[RandomStratified, Temporal]


def largest_remainder(targets: np.ndarray, total: int) -> np.ndarray:
    """Integer quotas summing to ``total``, closest to the float targets.

    Floors each target, then hands out the remaining units by descending
    fractional remainder (ties to the lower index).
    """
    targets = np.asarray(targets, dtype=np.float64)
    floors = np.floor(targets).astype(np.int64)
    leftover = total - int(floors.sum())
    if leftover < 0:
        raise ValueError("targets exceed total")
    remainders = targets - floors
    order = np.lexsort((np.arange(len(targets)), -remainders))
    quotas = floors.copy()
    for i in order[:leftover]:
        quotas[i] += 1
    return quotas


def split(table: Table, spec: SplitSpec) -> tuple[Table, Table]:
    """Partition into (train, test); both sides must be non-empty."""
    if isinstance(spec, Temporal):
        if spec.column not in table.names:
            raise StructuralError(f"timestamp column {spec.column!r} not present")
        if table.kind(spec.column) is not ColumnKind.TIMESTAMP:
            raise DataError(f"column {spec.column!r} is not a timestamp")
        col = table.column(spec.column)
        if np.isnat(col).any():
            rid = int(table.row_ids[np.argmax(np.isnat(col))])
            raise DataError(f"missing timestamp at row id {rid}; cannot split")
        try:
            cutoff = parse_timestamp(spec.cutoff, spec.date_format)
        except ValueError:
            raise ConfigError(
                f"cutoff {spec.cutoff!r} does not parse under {spec.date_format!r}"
            ) from None
        in_train = col <= cutoff
        train, test = table.mask(in_train), table.mask(~in_train)
        if train.n_rows == 0 or test.n_rows == 0:
            raise DataError("degenerate temporal split: one side is empty")
        check_temporal_split(train, test, spec.column, cutoff)
        return train, test

    if isinstance(spec, RandomStratified):
        if not 0.0 < spec.test_fraction < 1.0:
            raise ConfigError("test_fraction must be in (0, 1)")
        y = table.labels()
        rng = np.random.Generator(np.random.PCG64(spec.seed))
        n = table.n_rows
        total_test = int(np.floor(n * spec.test_fraction + 0.5))
        classes = [0, 1]
        counts = np.array([np.sum(y == c) for c in classes], dtype=np.float64)
        quotas = largest_remainder(counts * spec.test_fraction, total_test)
        test_pos: list[np.ndarray] = []
        for c, quota in zip(classes, quotas):
            members = np.flatnonzero(y == c)
            perm = rng.permutation(len(members))
            test_pos.append(members[perm[: int(quota)]])
        test_idx = np.sort(np.concatenate(test_pos))
        in_test = np.zeros(n, dtype=bool)
        in_test[test_idx] = True
        train, test = table.mask(~in_test), table.mask(in_test)
        if train.n_rows == 0 or test.n_rows == 0:
            raise DataError("degenerate stratified split: one side is empty")
        return train, test

    raise ConfigError(f"unknown split spec {spec!r}")


def check_temporal_split(
    train: Table, test: Table, column: str, cutoff: np.datetime64
) -> None:
    """Raise LeakageError if any train row is after the cutoff or any test
    row is at or before it."""
    train_ts = train.column(column)
    test_ts = test.column(column)
    if np.any(train_ts > cutoff):
        rid = int(train.row_ids[np.argmax(train_ts > cutoff)])
        raise LeakageError(f"train row id {rid} is after the cutoff {cutoff}")
    if np.any(test_ts <= cutoff):
        rid = int(test.row_ids[np.argmax(test_ts <= cutoff)])
        raise LeakageError(f"test row id {rid} is at or before the cutoff {cutoff}")


def check_split_partition(source: Table, train: Table, test: Table) -> None:
    """Raise LeakageError unless train/test ids partition the source ids."""
    train_ids = set(train.row_ids.tolist())
    test_ids = set(test.row_ids.tolist())
    overlap = train_ids & test_ids
    if overlap:
        raise LeakageError(f"row ids appear in both splits: {sorted(overlap)[:5]}")
    if train_ids | test_ids != set(source.row_ids.tolist()):
        raise LeakageError("train and test ids do not cover the source table")
