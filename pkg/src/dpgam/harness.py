"""Metrics and the repeated-split benchmark protocol.

An experiment is a grid over (epsilon, accountant) cells plus an optional
non-private cell; every cell trains on `repeats` fresh 80/20-style splits
and reports mean and sample std of the test metric. Everything is
deterministic in the master seed, including when repeats run in parallel.
"""

from __future__ import annotations

import csv
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .accountant import PrivacyBudget
from .dataset import Dataset, SplitPlan, clip_labels, load_csv, load_feature_specs, make_splits
from .model import GamModel, predict_batch, to_json_dict
from .trainer import TrainConfig, train_dp_ebm, train_ebm


def auroc(scores, labels) -> float:
    """Probability a random positive outscores a random negative, ties at 1/2.

    Computed from average ranks in O(n log n); equivalent to the
    Mann-Whitney pairwise count.
    """
    s = np.asarray(scores, dtype=float)
    y = np.asarray(labels, dtype=float)
    if s.shape != y.shape or s.ndim != 1:
        raise ValueError("scores and labels must be equal-length 1d arrays")
    n_pos = int(np.count_nonzero(y == 1))
    n_neg = int(np.count_nonzero(y == 0))
    if n_pos + n_neg != len(y):
        raise ValueError("labels must be 0 or 1")
    if n_pos == 0 or n_neg == 0:
        raise ValueError("need at least one positive and one negative label")
    order = np.argsort(s, kind="mergesort")
    s_sorted = s[order]
    n = len(s)
    new_group = np.empty(n, dtype=bool)
    new_group[0] = True
    new_group[1:] = s_sorted[1:] != s_sorted[:-1]
    group = np.cumsum(new_group) - 1
    starts = np.flatnonzero(new_group)
    ends = np.append(starts[1:], n)
    avg_rank = 0.5 * (starts + ends - 1) + 1.0
    ranks = np.empty(n)
    ranks[order] = avg_rank[group]
    pos_rank_sum = ranks[y == 1].sum()
    return float((pos_rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def rmse(predictions, labels) -> float:
    p = np.asarray(predictions, dtype=float)
    y = np.asarray(labels, dtype=float)
    if p.shape != y.shape or p.ndim != 1 or len(p) == 0:
        raise ValueError("predictions and labels must be equal-length non-empty 1d arrays")
    return float(np.sqrt(np.mean((p - y) ** 2)))


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: str
    registry: str
    epsilons: tuple[float, ...] = ()
    include_non_private: bool = True
    delta: float = 1e-6
    repeats: int = 25
    kinds: tuple[str, ...] = ("gdp",)
    bin_fraction: float = 0.1
    test_fraction: float = 0.2
    seed: int = 0
    workers: int = 1
    export_shapes: bool = False
    train: TrainConfig | None = None

    def __post_init__(self):
        object.__setattr__(self, "epsilons", tuple(self.epsilons))
        object.__setattr__(self, "kinds", tuple(self.kinds))
        if self.repeats < 1:
            raise ValueError(f"repeats must be >= 1, got {self.repeats}")
        if not self.epsilons and not self.include_non_private:
            raise ValueError("nothing to run: no epsilons and no non-private cell")


@dataclass
class CellResult:
    epsilon: float | None
    accountant: str | None
    values: list[float]

    @property
    def mean(self) -> float:
        return float(np.mean(self.values))

    @property
    def std(self) -> float:
        # sample (n-1) convention; undefined for a single repeat -> 0
        if len(self.values) < 2:
            return 0.0
        return float(np.std(self.values, ddof=1))


@dataclass
class MetricReport:
    dataset: str
    metric: str
    repeats: int
    cells: list[CellResult] = field(default_factory=list)

    def cell(self, epsilon, accountant) -> CellResult:
        for c in self.cells:
            if c.epsilon == epsilon and c.accountant == accountant:
                return c
        raise KeyError((epsilon, accountant))


def load_registry(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        reg = json.load(fh)
    if not isinstance(reg, dict):
        raise ValueError(f"{path}: registry must be a JSON object")
    return reg


def resolve_dataset(registry_path, name) -> tuple[Dataset, str]:
    """Load and clip a registry dataset; returns (dataset, task)."""
    reg = load_registry(registry_path)
    if name not in reg:
        raise ValueError(f"dataset {name!r} not in registry {registry_path}")
    entry = reg[name]
    base = os.path.dirname(os.path.abspath(registry_path))
    csv_path = os.path.join(base, entry["csv"])
    schema_path = os.path.join(base, entry["schema"])
    if not os.path.exists(csv_path):
        raise FileNotFoundError(
            f"{csv_path} not found; see the registry notes for {name!r} on how to "
            f"download and prepare it")
    specs = load_feature_specs(schema_path)
    d = load_csv(csv_path, specs, entry["label_column"])
    lo, hi = entry["label_bounds"]
    return clip_labels(d, float(lo), float(hi)), entry["task"]


def _repeat_seed(master: int, repeat: int) -> int:
    # documented derivation: repeat r trains with a seed drawn from the
    # (master, repeat) substream, independent of scheduling order
    ss = np.random.SeedSequence(master & ((1 << 64) - 1), spawn_key=(2, repeat))
    return int(ss.generate_state(1)[0])


def _run_cell(args):
    data, task, cfg, epsilon, kind, repeat = args
    train_set, test_set = data
    t_cfg = cfg.train if cfg.train is not None else TrainConfig(task=task)
    t_cfg = TrainConfig(task=task, epochs=t_cfg.epochs, learning_rate=t_cfg.learning_rate,
                        max_leaves=t_cfg.max_leaves, max_bins=t_cfg.max_bins,
                        seed=_repeat_seed(cfg.seed, repeat))
    if epsilon is None:
        m = train_ebm(train_set, t_cfg)
    else:
        budget = PrivacyBudget(epsilon=epsilon, delta=cfg.delta,
                               bin_fraction=cfg.bin_fraction)
        m = train_dp_ebm(train_set, t_cfg, budget, kind)
    preds = predict_batch(m, test_set.rows)
    if task == "binary_classification":
        value = auroc(preds, test_set.labels)
    else:
        value = rmse(preds, test_set.labels)
    return value, m


def _cell_grid(cfg: ExperimentConfig):
    if cfg.include_non_private:
        yield (None, None)
    for kind in cfg.kinds:
        for eps in cfg.epsilons:
            yield (eps, kind)


def run_experiment(cfg: ExperimentConfig, out_dir=None) -> MetricReport:
    """Execute the full grid; optionally write report.csv/report.json/shapes."""
    dataset, task = resolve_dataset(cfg.registry, cfg.dataset)
    metric = "auroc" if task == "binary_classification" else "rmse"
    plan = SplitPlan(seed=cfg.seed, test_fraction=cfg.test_fraction,
                     n_repeats=cfg.repeats)
    splits = make_splits(dataset, plan)

    jobs = [(split, task, cfg, eps, kind, r)
            for (eps, kind) in _cell_grid(cfg)
            for r, split in enumerate(splits)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_run_cell, jobs))
    else:
        results = [_run_cell(job) for job in jobs]

    report = MetricReport(dataset=cfg.dataset, metric=metric, repeats=cfg.repeats)
    shapes_dir = os.path.join(out_dir, "shapes") if (out_dir and cfg.export_shapes) else None
    for i, (eps, kind) in enumerate(_cell_grid(cfg)):
        values = []
        for r in range(cfg.repeats):
            value, m = results[i * cfg.repeats + r]
            values.append(value)
            if shapes_dir:
                export_shapes(m, shapes_dir, tag=f"{_eps_tag(eps, kind)}_rep{r}")
        report.cells.append(CellResult(epsilon=eps, accountant=kind, values=values))

    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        _write_csv(report, os.path.join(out_dir, "report.csv"))
        _write_json(report, os.path.join(out_dir, "report.json"))
    return report


def _eps_tag(eps, kind) -> str:
    return "non_private" if eps is None else f"{kind}_eps{eps:g}"


def export_shapes(m: GamModel, out_dir, tag: str) -> None:
    """One JSON per feature: edges/vocabulary, counts and shape values."""
    os.makedirs(out_dir, exist_ok=True)
    for entry in to_json_dict(m)["features"]:
        path = os.path.join(out_dir, f"{tag}_{_safe(entry['name'])}.json")
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(entry, fh, sort_keys=True, indent=1)
            fh.write("\n")


def _safe(name: str) -> str:
    return "".join(c if c.isalnum() or c in "-_" else "_" for c in name)


def _write_csv(report: MetricReport, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["dataset", "epsilon", "accountant", "repeat", "metric", "value"])
        for cell in report.cells:
            eps = "" if cell.epsilon is None else repr(float(cell.epsilon))
            kind = "none" if cell.accountant is None else cell.accountant
            for r, v in enumerate(cell.values):
                writer.writerow([report.dataset, eps, kind, r, report.metric, repr(v)])


def _write_json(report: MetricReport, path) -> None:
    doc = {
        "dataset": report.dataset,
        "metric": report.metric,
        "repeats": report.repeats,
        "cells": [
            {
                "epsilon": cell.epsilon,
                "accountant": cell.accountant,
                "mean": cell.mean,
                "std": cell.std,
                "values": cell.values,
            }
            for cell in report.cells
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, indent=1, allow_nan=False)
        fh.write("\n")
