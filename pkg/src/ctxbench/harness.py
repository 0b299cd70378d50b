"""Experiment grid orchestration: deterministic seeding, resumable store.

A plan enumerates (predictor, strategy, context size, repeat) cells over one
dataset. Every cell derives its own seed from the master seed and its
coordinates, so results are independent of scheduling order and worker
count. Records append to a JSONL store in plan order; a rerun over a
complete store executes nothing.
"""

from __future__ import annotations

import hashlib
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from .encoding import FittedEncoder, fit_encoder
from .errors import ConfigError, LeakageError
from .external import ExternalBackendDescriptor, ExternalPredictor
from .metrics import bundle
from .predictors import ContextGaussianNB, ContextKnn, ContextLogistic
from .strategies import ContextSpec, ContextWindow, build_context
from .tabular import Table


@dataclass(frozen=True)
class PredictorSpec:
    """One predictor in the grid: a native kind or an external command."""

    kind: str  # "knn" | "gaussian_nb" | "logistic" | "external"
    name: str
    params: dict = field(default_factory=dict)
    command: tuple[str, ...] = ()

    def build(self):
        if self.kind == "knn":
            return ContextKnn(**self.params)
        if self.kind == "gaussian_nb":
            return ContextGaussianNB(**self.params)
        if self.kind == "logistic":
            return ContextLogistic(**self.params)
        if self.kind == "external":
            if not self.command:
                raise ConfigError(f"external predictor {self.name!r} has no command")
            return ExternalPredictor(
                ExternalBackendDescriptor(command=self.command, name=self.name)
            )
        raise ConfigError(f"unknown predictor kind {self.kind!r}")


@dataclass(frozen=True)
class StrategySpec:
    """Strategy name plus its fixed parameters; budget and seed come per cell."""

    name: str
    params: dict = field(default_factory=dict)

    def context_spec(self, budget: int, seed: int) -> ContextSpec:
        return ContextSpec(strategy=self.name, budget=budget, seed=seed, **self.params)


@dataclass(frozen=True)
class ExperimentPlan:
    dataset: str
    train: Table
    test: Table
    predictors: tuple[PredictorSpec, ...]
    strategies: tuple[StrategySpec, ...]
    sizes: tuple[int, ...]
    repeats: int = 5
    master_seed: int = 0

    def __post_init__(self):
        if not self.predictors:
            raise ConfigError("plan needs at least one predictor")
        if not self.strategies:
            raise ConfigError("plan needs at least one strategy")
        if not self.sizes:
            raise ConfigError("plan needs at least one context size")
        if self.repeats < 1:
            raise ConfigError("repeats must be >= 1")

    def plan_hash(self) -> str:
        payload = {
            "dataset": self.dataset,
            "predictors": [
                [p.kind, p.name, sorted(p.params.items()), list(p.command)]
                for p in self.predictors
            ],
            "strategies": [[s.name, sorted(s.params.items())] for s in self.strategies],
            "sizes": list(self.sizes),
            "repeats": self.repeats,
            "master_seed": self.master_seed,
        }
        blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]

    def cells(self) -> list["Cell"]:
        out = []
        for pred in self.predictors:
            for strat in self.strategies:
                for size in self.sizes:
                    for rep in range(self.repeats):
                        out.append(Cell(pred, strat, size, rep))
        return out


@dataclass(frozen=True)
class Cell:
    predictor: PredictorSpec
    strategy: StrategySpec
    size: int
    repeat: int

    def cell_id(self, dataset: str) -> str:
        return f"{dataset}|{self.predictor.name}|{self.strategy.name}|{self.size}|{self.repeat}"


def derive_seed(
    master_seed: int,
    dataset: str,
    predictor: str,
    strategy: str,
    size: int,
    repeat: int,
) -> int:
    """Stable 63-bit seed from the master seed and cell coordinates."""
    blob = f"{master_seed}|{dataset}|{predictor}|{strategy}|{size}|{repeat}"
    digest = hashlib.sha256(blob.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") >> 1


def check_window_purity(window: ContextWindow, test: Table) -> None:
    """Raise LeakageError if any real window row id appears in the test split."""
    real_ids = window.rows.row_ids[~window.rows.synthetic]
    overlap = np.intersect1d(real_ids, test.row_ids)
    if len(overlap):
        raise LeakageError(
            f"test rows leaked into the context window: ids {overlap[:5].tolist()}"
        )


def run_cell(
    plan: ExperimentPlan,
    cell: Cell,
    encoder: FittedEncoder,
    plan_hash: str,
) -> dict:
    """Execute one cell: window, condition, score the full test split."""
    seed = derive_seed(
        plan.master_seed,
        plan.dataset,
        cell.predictor.name,
        cell.strategy.name,
        cell.size,
        cell.repeat,
    )
    record = {
        "plan_hash": plan_hash,
        "cell_id": cell.cell_id(plan.dataset),
        "dataset": plan.dataset,
        "predictor": cell.predictor.name,
        "predictor_version": "",
        "strategy": cell.strategy.name,
        "strategy_params": dict(sorted(cell.strategy.params.items())),
        "size": cell.size,
        "repeat": cell.repeat,
        "seed": seed,
        "counts": None,
        "metrics": None,
        "status": "ok",
        "error": None,
        "warnings": [],
        "duration_s": None,
    }
    started = time.perf_counter()
    state = None
    try:
        spec = cell.strategy.context_spec(cell.size, seed)
        window = build_context(plan.train, spec, encoder=encoder)
        check_window_purity(window, plan.test)
        record["counts"] = {
            "majority": window.n_majority,
            "minority": window.n_minority,
            "synthetic": window.n_synthetic,
        }
        predictor = cell.predictor.build()
        state = predictor.condition(window)
        scores = predictor.predict_proba(state, plan.test)
        scores = np.clip(scores, 0.0, 1.0)
        record["metrics"] = bundle(scores, plan.test.labels()).as_dict()
        record["predictor_version"] = getattr(predictor, "version", "")
        record["warnings"] = list(window.warnings) + list(
            getattr(state, "warnings", ())
        )
    except Exception as exc:  # cell failures are isolated, never fatal
        record["status"] = "failed"
        record["error"] = f"{type(exc).__name__}: {exc}"
    finally:
        if state is not None and hasattr(state, "close"):
            state.close()
    record["duration_s"] = round(time.perf_counter() - started, 6)
    return record


RECORD_KEYS = (
    "plan_hash",
    "cell_id",
    "dataset",
    "predictor",
    "predictor_version",
    "strategy",
    "strategy_params",
    "size",
    "repeat",
    "seed",
    "counts",
    "metrics",
    "status",
    "error",
    "warnings",
    "duration_s",
)


def _record_line(record: dict) -> str:
    ordered = {k: record[k] for k in RECORD_KEYS}
    return json.dumps(ordered, allow_nan=False, separators=(",", ":"))


def load_store(path: Path) -> list[dict]:
    records = []
    if path.exists():
        with path.open(encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    records.append(json.loads(line))
    return records


def repair_store(path: Path) -> list[dict]:
    """Load a store, truncating any partially written trailing line."""
    if not path.exists():
        return []
    records = []
    good_bytes = 0
    with path.open("rb") as fh:
        for raw in fh:
            try:
                text = raw.decode("utf-8").strip()
                if text:
                    records.append(json.loads(text))
            except (UnicodeDecodeError, json.JSONDecodeError):
                break
            good_bytes += len(raw)
    if good_bytes < path.stat().st_size:
        with path.open("r+b") as fh:
            fh.truncate(good_bytes)
    return records


def run(
    plan: ExperimentPlan,
    store_path: Path,
    workers: int = 1,
    resume: bool = False,
) -> list[dict]:
    """Run every missing cell and append records to the store in plan order.

    With ``resume`` the store may already contain records (matched by cell
    id); completed cells are never re-executed. Cells run in a thread pool;
    records are still written in deterministic plan order.
    """
    store_path = Path(store_path)
    plan_hash = plan.plan_hash()
    existing: dict[str, dict] = {}
    if resume:
        for rec in repair_store(store_path):
            if rec.get("plan_hash") == plan_hash:
                existing[rec["cell_id"]] = rec
    elif store_path.exists() and store_path.stat().st_size > 0:
        raise ConfigError(
            f"store {store_path} already has records; pass resume to continue"
        )

    encoder = fit_encoder(plan.train)
    cells = plan.cells()
    todo = [c for c in cells if c.cell_id(plan.dataset) not in existing]

    results: dict[str, dict] = {}
    if todo:
        if workers <= 1:
            done_iter = (run_cell(plan, c, encoder, plan_hash) for c in todo)
            with store_path.open("a", encoding="utf-8") as fh:
                for rec in done_iter:
                    results[rec["cell_id"]] = rec
                    fh.write(_record_line(rec) + "\n")
                    fh.flush()
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                futures = {
                    c.cell_id(plan.dataset): pool.submit(
                        run_cell, plan, c, encoder, plan_hash
                    )
                    for c in todo
                }
                with store_path.open("a", encoding="utf-8") as fh:
                    for c in todo:  # write in plan order regardless of completion
                        rec = futures[c.cell_id(plan.dataset)].result()
                        results[rec["cell_id"]] = rec
                        fh.write(_record_line(rec) + "\n")
                        fh.flush()

    out = []
    for c in cells:
        cid = c.cell_id(plan.dataset)
        out.append(existing.get(cid) or results[cid])
    return out


def records_for_metrics(records: Iterable[dict]) -> list[dict]:
    """Flatten store records into the mapping shape the aggregators expect."""
    flat = []
    for rec in records:
        metrics = rec.get("metrics") or {}
        flat.append(
            {
                "dataset": rec["dataset"],
                "predictor": rec["predictor"],
                "strategy": rec["strategy"],
                "size": rec["size"],
                "repeat": rec["repeat"],
                "auc": metrics.get("auc"),
                "mcc": metrics.get("mcc"),
                "default_f1": metrics.get("default_f1"),
                "balanced_accuracy": metrics.get("balanced_accuracy"),
                "status": rec.get("status", "ok"),
            }
        )
    return flat
