"""Cyclic gradient boosting, with and without differential privacy.

One iteration = one shallow tree on one feature: partition that feature's
bins into random contiguous groups, average the residuals per group (the
only step that touches labels), scale by the learning rate, and fold the
result into the feature's shape function. The DP path adds calibrated
Gaussian noise to each group's residual sum and divides by the noisy bin
counts published at binning time.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

from .accountant import (
    PrivacyBudget,
    allocate_budget,
    calibrate_binning_sigma,
    calibrate_training_sigma,
    compose_gdp,
    gdp_to_dp,
)
from .binning import FeatureBins, assign, categorical_bins, dp_quantile_bins, histogram
from .dataset import CATEGORICAL, Dataset
from .model import GamModel, PrivacyInfo, ShapeFunction, TrainingInfo

TASKS = ("regression", "binary_classification")

# substream tags: (phase, ...) spawn keys off the master seed, so adding
# parallelism later could not reorder the streams
_PHASE_BIN = 0
_PHASE_BOOST = 1

BUDGET_SLACK = 1e-9


@dataclass(frozen=True)
class TrainConfig:
    task: str
    epochs: int = 300
    learning_rate: float = 0.01
    max_leaves: int = 3
    max_bins: int = 32
    seed: int = 0

    def __post_init__(self):
        if self.task not in TASKS:
            raise ValueError(f"task must be one of {TASKS}, got {self.task!r}")
        if self.epochs < 1 or self.max_leaves < 1 or self.max_bins < 1:
            raise ValueError("epochs, max_leaves and max_bins must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be > 0, got {self.learning_rate}")


@dataclass(frozen=True)
class SplitPartition:
    """Contiguous bin-index groups [lo, hi) of one random tree."""

    groups: tuple[tuple[int, int], ...]

    def __post_init__(self):
        pos = 0
        for lo, hi in self.groups:
            if lo != pos or hi <= lo:
                raise ValueError(f"groups must be contiguous and non-empty: {self.groups}")
            pos = hi


@dataclass
class ResidualState:
    residuals: np.ndarray
    t: int = 0


class BudgetLedger:
    """Running GDP cost of every release made during one training run."""

    def __init__(self):
        self.mus: list[float] = []

    def add(self, mu: float) -> None:
        self.mus.append(mu)

    @property
    def total_mu(self) -> float:
        return compose_gdp(self.mus).mu

    def converted_delta(self, epsilon: float) -> float:
        return gdp_to_dp(self.total_mu, epsilon)

    def verify(self, epsilon: float, delta: float, slack: float = BUDGET_SLACK) -> None:
        actual = self.converted_delta(epsilon)
        if actual > delta + slack:
            raise RuntimeError(
                f"budget ledger violation: spent mu={self.total_mu} converts to "
                f"delta'={actual} > advertised delta={delta} at epsilon={epsilon}")


def _substream(seed: int, *key: int) -> np.random.Generator:
    entropy = seed & ((1 << 64) - 1)
    return np.random.default_rng(np.random.SeedSequence(entropy, spawn_key=key))


def random_partition(n_bins: int, max_leaves: int, rng: np.random.Generator) -> SplitPartition:
    """Uniform random contiguous partition into min(max_leaves, n_bins) groups."""
    if n_bins < 1:
        raise ValueError(f"need n_bins >= 1, got {n_bins}")
    n_groups = min(max_leaves, n_bins)
    cuts = np.sort(rng.choice(n_bins - 1, size=n_groups - 1, replace=False)) + 1 \
        if n_groups > 1 else np.empty(0, dtype=int)
    bounds = [0, *cuts.tolist(), n_bins]
    return SplitPartition(tuple((bounds[i], bounds[i + 1]) for i in range(len(bounds) - 1)))


def leaf_update(residual_sums, group_counts, learning_rate: float, label_range: float,
                sigma: float, rng: np.random.Generator) -> np.ndarray:
    """Per-group shape increments: eta * (noisy residual sum) / (count floor 1).

    The noisy sum is eta*T + sigma*eta*R*N(0,1) per group; the noisy-count
    denominator is floored at 1 so post-noise non-positive counts cannot
    blow up the increment.
    """
    residual_sums = np.asarray(residual_sums, dtype=float)
    group_counts = np.asarray(group_counts, dtype=float)
    noise = sigma * learning_rate * label_range * rng.standard_normal(len(residual_sums))
    t_hat = learning_rate * residual_sums + noise
    return t_hat / np.maximum(group_counts, 1.0)


def update_residuals(state: ResidualState, scores: np.ndarray, dataset: Dataset,
                     task: str) -> ResidualState:
    """Recompute all residuals from the current model scores.

    Regression: r = y - score. Binary classification: r = y + 1/(1+e^score) - 1,
    always in (-1, 1). This is the one place outside residual summation where
    label data is read.
    """
    y = dataset.labels
    if task == "regression":
        r = y - scores
    else:
        r = y + _sigmoid_neg(scores) - 1.0
    return ResidualState(residuals=r, t=state.t + 1)


def _sigmoid_neg(s: np.ndarray) -> np.ndarray:
    # 1 / (1 + e^s), stable for large |s|
    out = np.empty_like(s)
    neg = s < 0
    e = np.exp(s[~neg] * -1.0)
    out[~neg] = e / (1.0 + e)
    out[neg] = 1.0 / (1.0 + np.exp(s[neg]))
    return out


def build_bins(dataset: Dataset, cfg: TrainConfig, sigma_bin: float) -> list[FeatureBins]:
    """Public per-feature bin definitions (exact when sigma_bin == 0).

    Numeric features run the equal-width-then-merge quantile scheme; the
    raw column is clipped into the public [min, max] first, matching the
    clamp rule used at lookup time. Categorical features release one
    (noisy) count per vocabulary entry.
    """
    out = []
    for k, spec in enumerate(dataset.features):
        rng = _substream(cfg.seed, _PHASE_BIN, k)
        col = dataset.rows[:, k]
        if spec.kind == CATEGORICAL:
            exact = histogram(col, categorical_bins(spec, np.zeros(len(spec.vocabulary))))
            noisy = exact.counts + sigma_bin * rng.standard_normal(exact.n_bins)
            out.append(categorical_bins(spec, noisy, noise_scale=sigma_bin))
        else:
            col = np.clip(col, spec.min, spec.max)
            out.append(dp_quantile_bins(col, spec, cfg.max_bins, sigma_bin, rng))
    return out


def _classification_guard(dataset: Dataset, cfg: TrainConfig) -> None:
    if cfg.task != "binary_classification":
        return
    if dataset.label_bounds != (0.0, 1.0):
        raise ValueError("binary classification requires label bounds (0, 1)")
    y = dataset._labels
    if not np.all((y == 0.0) | (y == 1.0)):
        raise ValueError("binary classification requires labels exactly in {0, 1}")


def _boost(dataset: Dataset, cfg: TrainConfig, bins: list[FeatureBins], sigma: float,
           ledger: BudgetLedger | None, trace_dir=None) -> list[ShapeFunction]:
    n_rows, n_features = dataset.n_rows, dataset.n_features
    R = dataset.label_range
    eta = cfg.learning_rate
    B = np.column_stack([assign(b, dataset.rows[:, k]) for k, b in enumerate(bins)])
    counts = [b.counts for b in bins]
    shapes = [np.zeros(b.n_bins) for b in bins]

    state = ResidualState(residuals=dataset.labels.copy(), t=0)
    if trace_dir:
        os.makedirs(trace_dir, exist_ok=True)

    for epoch in range(1, cfg.epochs + 1):
        for k in range(n_features):
            rng = _substream(cfg.seed, _PHASE_BOOST, epoch, k)
            part = random_partition(bins[k].n_bins, cfg.max_leaves, rng)
            # residual summation: the single data access of the iteration
            bin_sums = np.bincount(B[:, k], weights=state.residuals,
                                   minlength=bins[k].n_bins)
            group_sums = [bin_sums[lo:hi].sum() for lo, hi in part.groups]
            group_counts = [counts[k][lo:hi].sum() for lo, hi in part.groups]
            incr = leaf_update(group_sums, group_counts, eta, R, sigma, rng)
            for (lo, hi), mu in zip(part.groups, incr):
                shapes[k][lo:hi] += mu
            if ledger is not None:
                ledger.add(1.0 / sigma if sigma > 0 else 0.0)

            scores = np.zeros(n_rows)
            for j in range(n_features):
                scores += shapes[j][B[:, j]]
            state = update_residuals(state, scores, dataset, cfg.task)

            if trace_dir:
                with open(os.path.join(trace_dir, f"iter_{state.t:06d}.json"), "w",
                          encoding="utf-8") as fh:
                    json.dump({"t": state.t, "epoch": epoch, "feature": k,
                               "values": shapes[k].tolist()}, fh)

    return [ShapeFunction(s) for s in shapes]


def train_ebm(train: Dataset, cfg: TrainConfig, trace_dir=None) -> GamModel:
    """Non-private cyclic boosting: exact bins and noise-free leaf averages.

    Split selection is the same random-partition scheme as the DP path, so
    the two differ only in the noise terms.
    """
    if train.label_bounds is None:
        raise ValueError("labels must be clipped before training")
    _classification_guard(train, cfg)
    bins = build_bins(train, cfg, sigma_bin=0.0)
    shapes = _boost(train, cfg, bins, sigma=0.0, ledger=None, trace_dir=trace_dir)
    return GamModel(
        link="logistic" if cfg.task == "binary_classification" else "identity",
        intercept=0.0,
        label_range=train.label_range,
        bins=bins,
        shapes=shapes,
        training=TrainingInfo(cfg.epochs, cfg.learning_rate, cfg.max_leaves,
                              cfg.max_bins, cfg.seed),
        privacy=None,
    )


def train_dp_ebm(train: Dataset, cfg: TrainConfig, budget: PrivacyBudget, kind: str,
                 force_sigma: float | None = None, force_bin_sigma: float | None = None,
                 ledger: BudgetLedger | None = None, trace_dir=None) -> GamModel:
    """Differentially private training under the given budget and accountant.

    The budget splits between binning and training; each phase calibrates
    its own Gaussian scale. A GDP ledger tracks every release (K histogram
    releases, then E*K leaf-sum releases) and the run aborts if the spent
    budget would not convert back inside the advertised (epsilon, delta).

    force_sigma / force_bin_sigma are test hooks; a forced run performs no
    calibrated noise addition and refuses to stamp privacy metadata.
    """
    if train.label_bounds is None:
        raise ValueError("labels must be clipped before training")
    _classification_guard(train, cfg)
    if kind not in ("classic", "gdp"):
        raise ValueError(f"unknown accountant kind: {kind!r}")
    if budget.bin_fraction == 0.0 and force_bin_sigma is None:
        raise ValueError(
            "bin_fraction must be > 0: the histogram release needs its own budget share")

    n_features = train.n_features
    budget_bin, budget_train = allocate_budget(budget)
    forced = force_sigma is not None or force_bin_sigma is not None
    sigma_bin = force_bin_sigma if force_bin_sigma is not None else \
        calibrate_binning_sigma(budget_bin, n_features, kind)
    sigma = force_sigma if force_sigma is not None else \
        calibrate_training_sigma(budget_train, cfg.epochs, n_features, kind)

    if ledger is None:
        ledger = BudgetLedger()
    bins = build_bins(train, cfg, sigma_bin=sigma_bin)
    for _ in range(n_features):
        ledger.add(1.0 / sigma_bin if sigma_bin > 0 else 0.0)
    shapes = _boost(train, cfg, bins, sigma=sigma, ledger=ledger, trace_dir=trace_dir)
    if not forced:
        ledger.verify(budget.epsilon, budget.delta)

    return GamModel(
        link="logistic" if cfg.task == "binary_classification" else "identity",
        intercept=0.0,
        label_range=train.label_range,
        bins=bins,
        shapes=shapes,
        training=TrainingInfo(cfg.epochs, cfg.learning_rate, cfg.max_leaves,
                              cfg.max_bins, cfg.seed),
        privacy=None if forced else PrivacyInfo(
            epsilon=budget.epsilon, delta=budget.delta, accountant=kind,
            sigma_train=sigma, sigma_bin=sigma_bin),
    )
