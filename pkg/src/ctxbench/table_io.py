"""Table persistence: a values CSV plus a JSON sidecar with schema and ids.

The sidecar pins column kinds, the label column, row ids, and synthetic
flags, so a save/load round trip reproduces the table exactly (floats are
written with repr precision; empty fields mean missing).
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .errors import StructuralError
from .tabular import ColumnKind, Table


def meta_path(path: Path) -> Path:
    return path.with_suffix(path.suffix + ".meta.json")


def save_table(table: Table, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(table.names)
        cols = [(table.column(n), table.kind(n)) for n in table.names]
        for i in range(table.n_rows):
            row = []
            for col, kind in cols:
                v = col[i]
                if kind is ColumnKind.NUMERIC:
                    row.append("" if np.isnan(v) else repr(float(v)))
                elif kind is ColumnKind.TIMESTAMP:
                    row.append("" if np.isnat(v) else str(np.datetime64(v, "s")))
                else:
                    row.append("" if v is None else v)
            writer.writerow(row)
    meta = {
        "kinds": {n: table.kind(n).value for n in table.names},
        "label": table.label,
        "row_ids": table.row_ids.tolist(),
        "synthetic": table.synthetic.astype(int).tolist(),
        "allow_duplicate_ids": bool(table.allow_duplicate_ids),
    }
    meta_path(path).write_text(json.dumps(meta), encoding="utf-8")
    return path


def load_table(path: Path) -> Table:
    path = Path(path)
    mpath = meta_path(path)
    if not mpath.exists():
        raise StructuralError(f"missing table sidecar {mpath}")
    meta = json.loads(mpath.read_text(encoding="utf-8"))
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        raw_rows = list(reader)
    cols = []
    for j, name in enumerate(header):
        kind = ColumnKind(meta["kinds"][name])
        values = [r[j] for r in raw_rows]
        if kind is ColumnKind.NUMERIC:
            parsed = np.array(
                [np.nan if v == "" else float(v) for v in values], dtype=np.float64
            )
        elif kind is ColumnKind.TIMESTAMP:
            parsed = np.array(
                [np.datetime64("NaT") if v == "" else np.datetime64(v) for v in values],
                dtype="datetime64[s]",
            )
        else:
            parsed = np.array([None if v == "" else v for v in values], dtype=object)
        cols.append((name, kind, parsed))
    names = tuple(name for name, _, _ in cols)
    kinds = tuple(kind for _, kind, _ in cols)
    arrays = []
    for _, _, arr in cols:
        a = np.array(arr, copy=True)
        arrays.append(a)
    return Table(
        names=names,
        kinds=kinds,
        columns=tuple(arrays),
        row_ids=np.asarray(meta["row_ids"], dtype=np.int64),
        synthetic=np.asarray(meta["synthetic"], dtype=bool),
        label=meta.get("label"),
        allow_duplicate_ids=bool(meta.get("allow_duplicate_ids", False)),
    )
