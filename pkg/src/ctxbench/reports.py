"""Report emission: strategy means, win rates, scaling gains, model table.

Each report writes a CSV and an aligned plain-text rendering. Missing or
failed cells are listed in a coverage footer, never filled in.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ConfigError
from .metrics import scaling_gain, strategy_means, win_rates

REPORT_KINDS = ("strategy-means", "win-rates", "scaling", "model-table")


def _aligned(rows: Sequence[Sequence[str]]) -> str:
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in rows]
    return "\n".join(lines) + "\n"


def _coverage_footer(records: list[dict]) -> str:
    bad = [r for r in records if r.get("status") != "ok" or r.get("auc") is None]
    if not bad:
        return f"# coverage: {len(records)}/{len(records)} cells scored\n"
    lines = [
        f"# coverage: {len(records) - len(bad)}/{len(records)} cells scored; "
        f"{len(bad)} missing/failed:"
    ]
    for r in bad:
        lines.append(
            f"#   {r['dataset']}|{r['predictor']}|{r['strategy']}|{r['size']}|{r['repeat']}"
            f" status={r.get('status')}"
        )
    return "\n".join(lines) + "\n"


def _write(out_dir: Path, stem: str, csv_rows: list[list], text: str) -> tuple[Path, Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"{stem}.csv"
    txt_path = out_dir / f"{stem}.txt"
    with csv_path.open("w", newline="", encoding="utf-8") as fh:
        csv.writer(fh).writerows(csv_rows)
    txt_path.write_text(text, encoding="utf-8")
    return csv_path, txt_path


def report_strategy_means(records: list[dict], out_dir: Path) -> tuple[Path, Path]:
    """Mean AUC per strategy x dataset (flat mean over scored cells)."""
    scored = [r for r in records if r.get("auc") is not None]
    if not scored:
        raise ConfigError("no scored cells in the requested slice")
    means = strategy_means(scored)
    datasets = sorted({d for _, d in means})
    strategies = sorted({s for s, _ in means})
    header = ["strategy", *datasets]
    csv_rows = [header]
    text_rows = [header]
    for s in strategies:
        row = [s] + [
            f"{means[(s, d)]:.4f}" if (s, d) in means else "" for d in datasets
        ]
        csv_rows.append(row)
        text_rows.append(row)
    text = _aligned(text_rows) + _coverage_footer(records)
    return _write(out_dir, "strategy_means", csv_rows, text)


def report_win_rates(records: list[dict], out_dir: Path, eps: float = 1e-4):
    matrix = win_rates([r for r in records if r.get("auc") is not None], eps=eps)
    if not matrix.strategies:
        raise ConfigError("no scored cells in the requested slice")
    matrix.check_totals()
    header = ["strategy", *matrix.strategies, "first_place_rate"]
    csv_rows = [header]
    text_rows = [header]
    for i, s in enumerate(matrix.strategies):
        cells = []
        for j, t in enumerate(matrix.strategies):
            if i == j:
                cells.append("-")
            else:
                shared = matrix.shared[i, j]
                rate = matrix.wins[i, j] / shared if shared else float("nan")
                cells.append(f"{rate:.3f}" if shared else "n/a")
        row = [s, *cells, f"{matrix.first_place[s]:.3f}"]
        csv_rows.append(row)
        text_rows.append(row)
    note = f"# win rate of row strategy over column strategy; tie eps={eps}\n"
    text = _aligned(text_rows) + note + _coverage_footer(records)
    return _write(out_dir, "win_rates", csv_rows, text)


def report_scaling(
    records: list[dict],
    out_dir: Path,
    min_size: int | None = None,
    max_size: int | None = None,
):
    scored = [r for r in records if r.get("auc") is not None]
    if not scored:
        raise ConfigError("no scored cells in the requested slice")
    sizes = sorted({r["size"] for r in scored})
    lo = min_size if min_size is not None else sizes[0]
    hi = max_size if max_size is not None else sizes[-1]
    strategies = sorted({r["strategy"] for r in scored})
    header = ["strategy", f"mean_auc_{lo}", f"mean_auc_{hi}", "gain"]
    csv_rows = [header]
    text_rows = [header]
    for s in strategies:
        at = {
            size: [r["auc"] for r in scored if r["strategy"] == s and r["size"] == size]
            for size in (lo, hi)
        }
        gain = scaling_gain(scored, s, min_size=lo, max_size=hi)
        row = [
            s,
            f"{np.mean(at[lo]):.4f}" if at[lo] else "missing",
            f"{np.mean(at[hi]):.4f}" if at[hi] else "missing",
            f"{gain:+.4f}" if gain is not None else "missing",
        ]
        csv_rows.append(row)
        text_rows.append(row)
    text = _aligned(text_rows) + _coverage_footer(records)
    return _write(out_dir, "scaling", csv_rows, text)


def report_model_table(records: list[dict], out_dir: Path):
    """Per-predictor means of AUC, MCC, default F1, balanced accuracy."""
    scored = [r for r in records if r.get("auc") is not None]
    if not scored:
        raise ConfigError("no scored cells in the requested slice")
    predictors = sorted({r["predictor"] for r in scored})
    header = ["model", "auc", "mcc", "default_f1", "balanced_accuracy"]
    csv_rows = [header]
    text_rows = [header]
    for p in predictors:
        rows = [r for r in scored if r["predictor"] == p]
        row = [p] + [
            f"{np.mean([r[k] for r in rows]):.4f}"
            for k in ("auc", "mcc", "default_f1", "balanced_accuracy")
        ]
        csv_rows.append(row)
        text_rows.append(row)
    text = _aligned(text_rows) + _coverage_footer(records)
    return _write(out_dir, "model_table", csv_rows, text)


def emit_report(kind: str, records: list[dict], out_dir: Path, **kwargs):
    if kind == "strategy-means":
        return report_strategy_means(records, out_dir)
    if kind == "win-rates":
        return report_win_rates(records, out_dir, **kwargs)
    if kind == "scaling":
        return report_scaling(records, out_dir, **kwargs)
    if kind == "model-table":
        return report_model_table(records, out_dir)
    raise ConfigError(f"unknown report kind {kind!r}; expected one of {REPORT_KINDS}")
