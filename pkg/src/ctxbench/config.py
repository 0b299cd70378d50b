"""Declarative TOML configuration for the whole pipeline.

One file can describe ingestion (schema hints, imputation rules, feature
recipes), the split, feature-selection thresholds, and the benchmark plan
grid. Every package default is overridable here.
"""

from __future__ import annotations

import sys
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigError
from .harness import ExperimentPlan, PredictorSpec, StrategySpec
from .ingest import (
    AddMissingIndicator,
    CategoryToken,
    FeatureRecipe,
    Difference,
    Flag,
    ImputationRule,
    NumericSentinel,
    RandomStratified,
    Ratio,
    Temporal,
)
from .strategies import DEFAULT_BUDGET_GRID
from .tabular import ColumnKind, Table


def load_config(path: Path) -> dict:
    with Path(path).open("rb") as fh:
        return tomllib.load(fh)


def parse_schema_hints(cfg: dict) -> dict[str, ColumnKind]:
    hints = cfg.get("ingest", {}).get("schema_hints", {})
    out = {}
    for name, kind in hints.items():
        try:
            out[name] = ColumnKind(kind)
        except ValueError:
            raise ConfigError(f"unknown column kind {kind!r} for {name!r}") from None
    return out


def parse_impute_rules(cfg: dict) -> list[ImputationRule]:
    rules = []
    for raw in cfg.get("impute", []):
        action = raw.get("action")
        if action == "numeric_sentinel":
            act = NumericSentinel(value=float(raw.get("value", -1.0)))
        elif action == "category_token":
            act = CategoryToken(token=str(raw.get("token", "MISSING")))
        elif action == "add_missing_indicator":
            act = AddMissingIndicator()
        else:
            raise ConfigError(f"unknown imputation action {action!r}")
        rules.append(ImputationRule(pattern=raw["pattern"], action=act))
    return rules


def parse_recipes(cfg: dict) -> list[FeatureRecipe]:
    recipes = []
    for raw in cfg.get("features", []):
        kind = raw.get("kind")
        if kind == "ratio":
            k = Ratio(raw["numerator"], raw["denominator"])
        elif kind == "difference":
            k = Difference(raw["a"], raw["b"])
        elif kind == "flag":
            k = Flag(raw["column"], raw["op"], float(raw["value"]))
        else:
            raise ConfigError(f"unknown recipe kind {kind!r}")
        recipes.append(
            FeatureRecipe(
                new_name=raw["name"],
                kind=k,
                zero_denominator_policy=float(raw.get("zero_denominator", -1.0)),
            )
        )
    return recipes


def parse_split(cfg: dict):
    raw = cfg.get("split")
    if raw is None:
        return None
    kind = raw.get("kind")
    if kind == "random_stratified":
        return RandomStratified(
            test_fraction=float(raw["test_fraction"]), seed=int(raw.get("seed", 0))
        )
    if kind == "temporal":
        return Temporal(
            column=raw["column"],
            cutoff=raw["cutoff"],
            date_format=raw.get("date_format", "%Y-%m-%d"),
        )
    raise ConfigError(f"unknown split kind {kind!r}")


def parse_selection(cfg: dict) -> dict:
    raw = cfg.get("selection", {})
    return {
        "correlation_threshold": float(raw.get("correlation_threshold", 0.95)),
        "mi_bins": int(raw.get("mi_bins", 10)),
        "mi_keep": raw.get("mi_keep"),
        "vif_cap": float(raw.get("vif_cap", 10.0)),
        "importance_keep": int(raw.get("importance_keep", 0)),
        "importance_rounds": int(raw.get("importance_rounds", 5)),
        "seed": int(raw.get("seed", 0)),
    }


def parse_plan(cfg: dict, train: Table, test: Table) -> ExperimentPlan:
    raw = cfg.get("plan")
    if raw is None:
        raise ConfigError("config has no [plan] section")
    strategies = []
    for s in raw.get("strategies", []):
        params = {k: v for k, v in s.items() if k != "name"}
        strategies.append(StrategySpec(name=s["name"], params=params))
    predictors = []
    for p in raw.get("predictors", []):
        predictors.append(
            PredictorSpec(
                kind=p["kind"],
                name=p.get("name", p["kind"]),
                params={
                    k: v for k, v in p.items() if k not in ("kind", "name", "command")
                },
                command=tuple(p.get("command", ())),
            )
        )
    return ExperimentPlan(
        dataset=raw.get("dataset", "dataset"),
        train=train,
        test=test,
        predictors=tuple(predictors),
        strategies=tuple(strategies),
        sizes=tuple(int(s) for s in raw.get("sizes", DEFAULT_BUDGET_GRID)),
        repeats=int(raw.get("repeats", 5)),
        master_seed=int(raw.get("master_seed", 0)),
    )
