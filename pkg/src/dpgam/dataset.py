"""Tabular ingestion under the public-knowledge contract.

Feature ranges and category vocabularies are operator-supplied public
inputs; nothing is ever inferred from the data itself. Datasets are
immutable after construction, and label reads go through a counted
accessor so the privacy audit tests can see exactly when sensitive values
were touched.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np

NUMERIC = "numeric"
CATEGORICAL = "categorical"


@dataclass(frozen=True)
class FeatureSpec:
    """Public per-feature domain knowledge: range or vocabulary."""

    name: str
    kind: str
    min: float | None = None
    max: float | None = None
    vocabulary: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.kind == NUMERIC:
            if self.min is None or self.max is None:
                raise ValueError(f"numeric feature {self.name!r} needs min and max")
            if not (math.isfinite(self.min) and math.isfinite(self.max) and self.min < self.max):
                raise ValueError(f"feature {self.name!r} needs finite min < max")
            if self.vocabulary is not None:
                raise ValueError(f"numeric feature {self.name!r} cannot carry a vocabulary")
        elif self.kind == CATEGORICAL:
            if not self.vocabulary:
                raise ValueError(f"categorical feature {self.name!r} needs a non-empty vocabulary")
            object.__setattr__(self, "vocabulary", tuple(self.vocabulary))
            if len(set(self.vocabulary)) != len(self.vocabulary):
                raise ValueError(f"feature {self.name!r} vocabulary has duplicates")
            if self.min is not None or self.max is not None:
                raise ValueError(f"categorical feature {self.name!r} cannot carry min/max")
        else:
            raise ValueError(f"unknown feature kind {self.kind!r}")


@dataclass(frozen=True)
class SplitPlan:
    seed: int
    test_fraction: float
    n_repeats: int = 1

    def __post_init__(self):
        if not (0.0 < self.test_fraction < 1.0):
            raise ValueError(f"test_fraction must be in (0, 1), got {self.test_fraction}")
        if self.n_repeats < 1:
            raise ValueError(f"n_repeats must be >= 1, got {self.n_repeats}")


class Dataset:
    """Validated feature matrix + labels.

    ``rows`` is an N x K float matrix; categorical cells hold the vocabulary
    index. Arrays are frozen read-only. ``label_bounds`` stays None until
    clip_labels() establishes them, after which the label range R is fixed
    model metadata.
    """

    def __init__(self, features, rows, labels, label_bounds=None):
        self.features: list[FeatureSpec] = list(features)
        rows = np.ascontiguousarray(rows, dtype=float)
        labels = np.ascontiguousarray(labels, dtype=float)
        if rows.ndim != 2:
            raise ValueError("rows must be a 2d matrix")
        n, k = rows.shape
        if n < 1 or k < 1:
            raise ValueError(f"need N >= 1 and K >= 1, got shape {rows.shape}")
        if k != len(self.features):
            raise ValueError(f"{k} columns for {len(self.features)} feature specs")
        if labels.shape != (n,):
            raise ValueError(f"need one label per row, got {labels.shape} for N={n}")
        if not np.all(np.isfinite(rows)):
            raise ValueError("feature values must all be finite")
        if not np.all(np.isfinite(labels)):
            raise ValueError("labels must all be finite")
        for j, spec in enumerate(self.features):
            if spec.kind == CATEGORICAL:
                col = rows[:, j]
                if np.any(col != col.astype(np.int64)) or col.min() < 0 \
                        or col.max() >= len(spec.vocabulary):
                    raise ValueError(f"column {spec.name!r} has indices outside its vocabulary")
        if label_bounds is not None:
            lo, hi = float(label_bounds[0]), float(label_bounds[1])
            if not lo < hi:
                raise ValueError(f"need y_min < y_max, got {label_bounds}")
            if labels.min() < lo or labels.max() > hi:
                raise ValueError("labels violate label_bounds; clip first")
            label_bounds = (lo, hi)
        rows.setflags(write=False)
        labels.setflags(write=False)
        self.rows = rows
        self._labels = labels
        self.label_bounds: tuple[float, float] | None = label_bounds
        self.label_reads = 0

    @property
    def labels(self) -> np.ndarray:
        """Sensitive per-row labels; every read is counted for the audit."""
        self.label_reads += 1
        return self._labels

    @property
    def n_rows(self) -> int:
        return self.rows.shape[0]

    @property
    def n_features(self) -> int:
        return self.rows.shape[1]

    @property
    def label_range(self) -> float:
        if self.label_bounds is None:
            raise ValueError("label_bounds not set; call clip_labels first")
        return self.label_bounds[1] - self.label_bounds[0]


def load_feature_specs(path) -> list[FeatureSpec]:
    """Read a JSON schema file: a list of {name, kind, min, max, vocabulary}."""
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    if isinstance(raw, dict):
        raw = raw.get("features", raw)
    if not isinstance(raw, list):
        raise ValueError(f"schema file {path} must hold a list of feature objects")
    specs = []
    for entry in raw:
        vocab = entry.get("vocabulary")
        specs.append(FeatureSpec(
            name=entry["name"],
            kind=entry["kind"],
            min=entry.get("min"),
            max=entry.get("max"),
            vocabulary=tuple(vocab) if vocab is not None else None,
        ))
    return specs


def load_csv(path, specs: list[FeatureSpec], label_column: str) -> Dataset:
    """Parse a headered CSV against the public schema.

    Categorical cells map to vocabulary indices; numeric cells are kept
    verbatim. Unknown categories, non-numeric labels, missing columns and
    empty cells are all hard errors - there is no imputation.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        col_of = {name: i for i, name in enumerate(header)}
        for spec in specs:
            if spec.name not in col_of:
                raise ValueError(f"{path}: missing column {spec.name!r}")
        if label_column not in col_of:
            raise ValueError(f"{path}: missing label column {label_column!r}")

        vocab_index = {
            spec.name: {cat: i for i, cat in enumerate(spec.vocabulary)}
            for spec in specs if spec.kind == CATEGORICAL
        }
        rows, labels = [], []
        for lineno, record in enumerate(reader, start=2):
            if not record:
                continue
            out = []
            for spec in specs:
                cell = record[col_of[spec.name]].strip()
                if cell == "":
                    raise ValueError(f"{path}:{lineno}: missing value for {spec.name!r}")
                if spec.kind == NUMERIC:
                    try:
                        v = float(cell)
                    except ValueError:
                        raise ValueError(
                            f"{path}:{lineno}: non-numeric value {cell!r} for {spec.name!r}"
                        ) from None
                    if not math.isfinite(v):
                        raise ValueError(f"{path}:{lineno}: non-finite value for {spec.name!r}")
                    out.append(v)
                else:
                    try:
                        out.append(float(vocab_index[spec.name][cell]))
                    except KeyError:
                        raise ValueError(
                            f"{path}:{lineno}: value {cell!r} not in vocabulary of {spec.name!r}"
                        ) from None
            raw_label = record[col_of[label_column]].strip()
            try:
                labels.append(float(raw_label))
            except ValueError:
                raise ValueError(
                    f"{path}:{lineno}: non-numeric label {raw_label!r}") from None
            rows.append(out)
    if not rows:
        raise ValueError(f"{path}: no data rows")
    return Dataset(specs, np.asarray(rows), np.asarray(labels))


def export_csv(d: Dataset, path, label_column: str) -> None:
    """Inverse of load_csv up to float formatting (repr round-trips exactly)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([spec.name for spec in d.features] + [label_column])
        for i in range(d.n_rows):
            cells = []
            for j, spec in enumerate(d.features):
                v = d.rows[i, j]
                if spec.kind == CATEGORICAL:
                    cells.append(spec.vocabulary[int(v)])
                else:
                    cells.append(repr(float(v)))
            cells.append(repr(float(d._labels[i])))
            writer.writerow(cells)


def clip_labels(d: Dataset, y_min: float, y_max: float) -> Dataset:
    """Clamp every label into [y_min, y_max] and stamp the bounds.

    Idempotent; the resulting range R = y_max - y_min is what bounds the
    sensitivity of every leaf-sum release during training.
    """
    if not y_min < y_max:
        raise ValueError(f"need y_min < y_max, got ({y_min}, {y_max})")
    clipped = np.clip(d._labels, y_min, y_max)
    return Dataset(d.features, d.rows, clipped, label_bounds=(y_min, y_max))


def _test_size(n: int, fraction: float) -> int:
    # round-half-up so split sizes are exactly reproducible
    return int(math.floor(n * fraction + 0.5))


def make_splits(d: Dataset, plan: SplitPlan) -> list[tuple[Dataset, Dataset]]:
    """Deterministic 80/20-style splits; each repeat is an exact partition.

    Repeat r permutes rows with the substream SeedSequence(seed, spawn_key=(r,)),
    so the sequence of splits depends only on the plan, never on scheduling.
    """
    n_test = _test_size(d.n_rows, plan.test_fraction)
    if n_test < 1 or n_test >= d.n_rows:
        raise ValueError(
            f"N={d.n_rows} with test_fraction={plan.test_fraction} leaves an empty part")
    out = []
    for r in range(plan.n_repeats):
        rng = np.random.default_rng(np.random.SeedSequence(plan.seed, spawn_key=(r,)))
        perm = rng.permutation(d.n_rows)
        test_idx, train_idx = perm[:n_test], perm[n_test:]
        out.append((
            Dataset(d.features, d.rows[train_idx], d._labels[train_idx], d.label_bounds),
            Dataset(d.features, d.rows[test_idx], d._labels[test_idx], d.label_bounds),
        ))
    return out
